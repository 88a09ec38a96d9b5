#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pdama/bench_oracle.hpp"
#include "pdama/core_model.hpp"

using namespace pdama;

namespace {

ProblemSpec scalar_spec() {
  ProblemSpec s;
  s.A = MatrixXd::Constant(1, 1, 1.0);
  s.B = MatrixXd::Constant(1, 1, -1.0);
  s.c = VectorXd::Zero(1);
  s.g.diag = VectorXd::Constant(1, 1.0);
  s.g.shift = VectorXd::Constant(1, 1.0);
  s.U = BoxSet::unbounded(1);
  s.V = BoxSet::uniform(1, 0.0, 0.5);
  return s;
}

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

TEST(BoxSet, RejectsInvertedBounds) {
  EXPECT_EQ(code_of([] { BoxSet(VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 0.0)); }),
            ErrorCode::bad_bounds);
}

TEST(BoxSet, BoundednessAndFreeCoordinates) {
  EXPECT_TRUE(BoxSet::uniform(3, -1, 1).is_bounded());
  EXPECT_FALSE(BoxSet::unbounded(2).is_bounded());
  VectorXd lo(2), up(2);
  lo << -1, -kInf;
  up << 1, 2;
  BoxSet half(lo, up);
  EXPECT_FALSE(half.is_bounded());
  EXPECT_TRUE(half.contains(VectorXd::Constant(2, 0.5)));
}

TEST(Validate, ScalarInstanceIsStronglyConvexEligible) {
  const auto v = validate(scalar_spec());
  EXPECT_TRUE(v.strongly_convex);
  EXPECT_FALSE(v.u_bounded);
}

TEST(Validate, RejectsNonDiagonalBtB) {
  ProblemSpec s = scalar_spec();
  s.A = MatrixXd::Identity(2, 1);
  s.c = VectorXd::Zero(2);
  s.B.resize(2, 2);
  s.B << 1, 1, 0, 1;
  s.V = BoxSet::uniform(2, 0.0, 0.5);
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::unsupported_b);
}

TEST(Validate, PermutationBIsAccepted) {
  // [[0,1],[1,0]] has B^T B = I
  ProblemSpec s = scalar_spec();
  s.A = MatrixXd::Identity(2, 1);
  s.c = VectorXd::Zero(2);
  s.B.resize(2, 2);
  s.B << 0, 1, 1, 0;
  s.V = BoxSet::uniform(2, 0.0, 0.5);
  EXPECT_NO_THROW(validate(s));
}

TEST(Validate, ZeroDiagWithFreeUIsNotSmoothable) {
  ProblemSpec s = scalar_spec();
  s.g.diag[0] = 0.0;
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::not_smoothable);
}

TEST(Validate, DimensionAndVChecks) {
  ProblemSpec s = scalar_spec();
  s.c = VectorXd::Zero(2);
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::dimension_mismatch);
  s = scalar_spec();
  s.V = BoxSet::unbounded(1);
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::unbounded_v);
}

TEST(Validate, Idempotent) {
  oracle::Gen gen(11);
  for (int t = 0; t < 20; ++t) {
    InstanceRecipe r{static_cast<std::uint64_t>(t), gen.integer(1, 4), gen.integer(1, 4), t % 2 == 0, {}};
    const ProblemSpec s = generate(r).to_spec();
    const auto v1 = validate(s);
    const auto v2 = validate(v1.spec);
    EXPECT_EQ(v1, v2);
  }
}

TEST(SpectralNorm, DiagonalAndNilpotent) {
  MatrixXd a(2, 2);
  a << 3, 0, 0, 4;
  EXPECT_NEAR(spectral_norm(a), 4.0, 4e-10);
  MatrixXd b(2, 2);
  b << 0, 1, 0, 0;
  EXPECT_NEAR(spectral_norm(b), 1.0, 1e-10);
  EXPECT_EQ(spectral_norm(MatrixXd::Zero(2, 3)), 0.0);
}

TEST(SpectralNorm, MatchesJacobiOracle) {
  oracle::Gen gen(3);
  for (int t = 0; t < 50; ++t) {
    const MatrixXd A = gen.mat(gen.integer(2, 4), gen.integer(2, 4));
    const double ref = oracle::jacobi_spectral_norm(A);
    EXPECT_NEAR(spectral_norm(A), ref, 1e-8 * ref);
    EXPECT_NEAR(spectral_norm(A) * spectral_norm(A), ref * ref, 1e-8 * ref * ref);
  }
}

TEST(ProxDiameter, Examples) {
  const BoxSet u = BoxSet::uniform(2, -1, 1);
  EXPECT_DOUBLE_EQ(prox_diameter(u, VectorXd::Zero(2)), 1.0);
  VectorXd c(2);
  c << 1, 0;
  EXPECT_DOUBLE_EQ(prox_diameter(u, c), 2.5);
  VectorXd lo = VectorXd::Zero(1), up = VectorXd::Constant(1, kInf);
  EXPECT_EQ(code_of([&] { prox_diameter(BoxSet(lo, up), VectorXd::Zero(1)); }), ErrorCode::unbounded_set);
}

TEST(ProxDiameter, EqualsVertexMaximum) {
  oracle::Gen gen(5);
  for (int t = 0; t < 200; ++t) {
    const Index p = gen.integer(1, 10);
    VectorXd lo = gen.vec(p, -3, 0), up = gen.vec(p, 0, 3);
    VectorXd center(p);
    for (Index i = 0; i < p; ++i) center[i] = gen.uni(lo[i], up[i]);
    EXPECT_NEAR(prox_diameter(BoxSet(lo, up), center), oracle::vertex_prox_max(lo, up, center), 1e-12);
  }
}

TEST(Reformulate, ScalarAndBadBounds) {
  const VectorXd one = VectorXd::Constant(1, 1.0);
  const ProblemSpec s = reformulate_qp(one, one, MatrixXd::Constant(1, 1, 1.0), VectorXd::Zero(1),
                                       VectorXd::Constant(1, 0.5), kInf);
  EXPECT_EQ(s.B(0, 0), -1.0);
  EXPECT_EQ(s.c[0], 0.0);
  EXPECT_EQ(s.V.lower[0], 0.0);
  EXPECT_EQ(s.V.upper[0], 0.5);
  EXPECT_FALSE(s.U.is_bounded());
  EXPECT_EQ(code_of([&] { reformulate_qp(one, one, MatrixXd::Constant(1, 1, 1.0), one, one, kInf); }),
            ErrorCode::bad_bounds);
}

TEST(Reformulate, SeededInstanceContainsAnchor) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const QpInstance inst = generate({seed, 2, 2, seed % 2 == 0, {}});
    const ProblemSpec s = inst.to_spec();
    const PrimalPoint x{inst.anchor, inst.A * inst.anchor};
    EXPECT_TRUE(s.U.contains(x.u));
    EXPECT_TRUE(s.V.contains(x.v));
    EXPECT_NEAR(feasibility_gap(s, x), 0.0, 1e-14);
  }
}

TEST(Objective, ExamplesAndIndicator) {
  const ProblemSpec s = scalar_spec();
  PrimalPoint x{VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 0.5)};
  EXPECT_DOUBLE_EQ(objective(s, x), 0.0);
  EXPECT_DOUBLE_EQ(feasibility_gap(s, x), 0.5);
  x.v[0] = 0.5 + 1e-3;
  EXPECT_EQ(objective(s, x), kInf);
  x.u[0] = 0.3;
  x.v[0] = 0.3;
  EXPECT_EQ(feasibility_gap(s, x), 0.0);
  EXPECT_TRUE(std::isfinite(objective(s, x)));
}

TEST(Objective, ZeroGapImpliesFiniteObjective) {
  oracle::Gen gen(8);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const QpInstance inst = generate({seed, 3, 2, false, {}});
    const ProblemSpec s = inst.to_spec();
    VectorXd u(2);
    for (Index i = 0; i < 2; ++i) u[i] = gen.uni(-inst.r, inst.r);
    const VectorXd v = inst.A * u;
    if (!s.V.contains(v)) continue;
    const PrimalPoint x{u, v};
    EXPECT_EQ(feasibility_gap(s, x), 0.0);
    EXPECT_TRUE(std::isfinite(objective(s, x)));
  }
}

TEST(Smoothing, ConstantsAndDiameterSpotCheck) {
  const QpInstance inst = generate({4, 3, 3, false, {}});
  const ProblemSpec s = inst.to_spec();
  const SmoothingSetup sm = make_smoothing(s, 0.01);
  EXPECT_EQ(sm.lipschitz_smoothed, sm.norm_A * sm.norm_A / (sm.gamma * sm.mu_p));
  oracle::Gen gen(9);
  for (int t = 0; t < 500; ++t) {
    VectorXd u(3);
    for (Index i = 0; i < 3; ++i) u[i] = gen.uni(s.U.lower[i], s.U.upper[i]);
    EXPECT_LE(0.5 * (u - sm.center).squaredNorm(), sm.d_u);
  }
  EXPECT_EQ(code_of([&] { make_smoothing(s, 0.0); }), ErrorCode::invalid_config);
}
