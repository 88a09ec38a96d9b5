#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pdama/bench_oracle.hpp"
#include "pdama/io.hpp"

using namespace pdama;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::parse_error;
}

}  // namespace

TEST(Rng, OpenUnitIntervalAndDeterminism) {
  InstanceRng a(5), b(5);
  for (int i = 0; i < 100000; ++i) {
    const double x = a.uniform();
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
    ASSERT_EQ(x, b.uniform());
  }
}

TEST(Generate, ConstructionGuarantees) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const bool sc = seed % 2 == 1;
    const InstanceRecipe r{seed, 1 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed % 4), sc, {}};
    const QpInstance p = generate(r);
    const VectorXd ax = p.A * p.anchor;
    for (Index i = 0; i < p.a.size(); ++i) {
      ASSERT_LT(p.a[i], p.b[i]);
      ASSERT_LT(p.a[i], ax[i]);  // strict: Slater point inside V
      ASSERT_GT(p.b[i], ax[i]);
    }
    if (sc) {
      ASSERT_GE(p.D.minCoeff(), 0.1);
      ASSERT_GE(p.D.minCoeff() * p.D.minCoeff(), 0.01);
      ASSERT_EQ(p.r, kInf);
    } else {
      ASSERT_EQ(p.D.minCoeff(), 0.0);
      ASSERT_EQ(p.r, p.anchor.lpNorm<Eigen::Infinity>());
    }
    const QpInstance again = generate(r);
    ASSERT_EQ(io::problem_to_json(p).dump(), io::problem_to_json(again).dump());
    ASSERT_EQ(p.anchor, again.anchor);
  }
}

TEST(Oracle, ScalarExample) {
  const VectorXd one = VectorXd::Constant(1, 1.0);
  const ProblemSpec s = reformulate_qp(one, one, MatrixXd::Constant(1, 1, 1.0), VectorXd::Zero(1),
                                       VectorXd::Constant(1, 0.5), kInf);
  const ReferenceSolution r = oracle_solve(s);
  EXPECT_NEAR(r.x_star.u[0], 0.5, 1e-14);
  EXPECT_NEAR(r.x_star.v[0], 0.5, 1e-14);
  EXPECT_NEAR(r.f_star, 0.125, 1e-14);
  EXPECT_NEAR(r.lambda_star[0], -0.5, 1e-14);
  ASSERT_EQ(r.active_set.size(), 1u);
  EXPECT_EQ(r.active_set[0], 3);  // upper bound of v
}

TEST(Oracle, InteriorCaseHasEmptyActiveSet) {
  VectorXd D(2), q(2);
  D << 1, 2;
  q << 0.3, -0.2;
  const ProblemSpec s = reformulate_qp(D, q, MatrixXd::Identity(2, 2), VectorXd::Constant(2, -10),
                                       VectorXd::Constant(2, 10), kInf);
  const ReferenceSolution r = oracle_solve(s);
  EXPECT_TRUE(r.active_set.empty());
  EXPECT_NEAR(r.x_star.u[0], 0.3, 1e-14);
  EXPECT_NEAR(r.x_star.u[1], -0.1, 1e-14);
  EXPECT_NEAR(r.f_star, 0.0, 1e-14);
  EXPECT_LE(r.lambda_star.norm(), 1e-14);
}

TEST(Oracle, DegenerateTieReturnsUniqueValue) {
  // two parallel constraints on one variable, both active at the optimum
  VectorXd D(1), q(1);
  D << 1;
  q << 2;
  MatrixXd A(2, 1);
  A << 1, 1;
  const ProblemSpec s = reformulate_qp(D, q, A, VectorXd::Constant(2, -1), VectorXd::Constant(2, 1), kInf);
  const ReferenceSolution r = oracle_solve(s);
  EXPECT_NEAR(r.f_star, 0.5, 1e-12);
  EXPECT_NEAR(r.x_star.u[0], 1.0, 1e-12);
}

TEST(Oracle, TooLarge) {
  const QpInstance p = generate({1, 7, 6, true, {}});
  EXPECT_EQ(code_of([&] { oracle_solve(p.to_spec()); }), ErrorCode::too_large);
  EXPECT_EQ(code_of([&] { run_experiment({1, 7, 6, true, {}}, {}); }), ErrorCode::too_large);
}

TEST(Oracle, KktAndStrongDuality) {
  for (std::uint64_t seed = 500; seed < 520; ++seed) {
    const InstanceRecipe r{seed, 1 + static_cast<int>(seed % 4), 1 + static_cast<int>((seed / 4) % 4), seed % 2 == 0, {}};
    const ProblemSpec s = generate(r).to_spec();
    const ReferenceSolution ref = oracle_solve(s);
    EXPECT_LE(ref.kkt_residual, 1e-10);
    EXPECT_LE(feasibility_gap(s, ref.x_star), 1e-10);
    EXPECT_NEAR(dual_value(s, ref.lambda_star), ref.f_star, 1e-8) << seed;
  }
}

TEST(Oracle, MatchesGridSearchOnTinyInstances) {
  int checked = 0;
  for (std::uint64_t seed = 600; seed < 630; ++seed) {
    const int p1 = 1 + static_cast<int>(seed % 2);
    const int n = p1 == 1 ? 1 + static_cast<int>((seed / 2) % 2) : 1;
    const bool sc = seed % 3 == 0;
    const QpInstance p = generate({seed, n, p1, sc, {}});
    const ReferenceSolution ref = oracle_solve(p.to_spec());
    double R = p.r;
    if (!std::isfinite(R)) {
      R = std::max(p.anchor.lpNorm<Eigen::Infinity>(), (p.q.array() / p.D.array()).abs().maxCoeff()) + 1.0;
    }
    const double grid = oracle::grid_qp_min(p.D, p.q, p.A, p.a, p.b, R, 1e-3);
    EXPECT_NEAR(ref.f_star, grid, 1e-2) << seed;
    EXPECT_LE(ref.f_star, grid + 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 30);
}

TEST(Experiment, StronglyConvexBothVariantsPass) {
  ExperimentConfig cfg;
  cfg.momenta = {MomentumMode::classic};
  cfg.max_iter = 1000;
  const ExperimentReport rep = run_experiment({7, 3, 3, true, {}}, cfg);
  ASSERT_EQ(rep.runs.size(), 2u);
  for (const auto& r : rep.runs) EXPECT_TRUE(r.pass) << r.theorem;
  EXPECT_EQ(rep.runs[0].theorem, "cor51");
  EXPECT_EQ(rep.runs[1].theorem, "cor51_accel");
}

TEST(Experiment, AmaReachesEpsBeforePrediction) {
  ExperimentConfig cfg;
  cfg.algorithms = {Algorithm::ama};
  cfg.max_iter = 20000;
  for (std::uint64_t seed : {102u, 105u}) {
    const ExperimentReport rep = run_experiment({seed, 3, 3, false, {}}, cfg);
    const auto& r = rep.runs[0];
    ASSERT_TRUE(r.predicted.has_value());
    ASSERT_TRUE(r.first_eps_k.has_value()) << seed;
    EXPECT_LE(*r.first_eps_k, *r.predicted);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Experiment, ReportIsDeterministic) {
  ExperimentConfig cfg;
  cfg.momenta = {MomentumMode::paper, MomentumMode::classic};
  cfg.max_iter = 300;
  const auto a = io::report_to_json(run_experiment({11, 3, 2, false, {}}, cfg)).dump();
  const auto b = io::report_to_json(run_experiment({11, 3, 2, false, {}}, cfg)).dump();
  EXPECT_EQ(a, b);
}
