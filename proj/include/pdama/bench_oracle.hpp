#pragma once

// Seeded instances of the box-constrained projection QP
//   min 1/2||D u - q||^2  s.t.  a <= A u <= b,  ||u||_inf <= r
// and an exact active-set reference solver for small instances.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "pdama/certificates.hpp"
#include "pdama/solver.hpp"

namespace pdama {

enum class RPolicy { infinite, from_anchor };

struct InstanceRecipe {
  std::uint64_t seed = 0;
  int n = 2;
  int p1 = 2;
  bool strongly_convex = false;
  /// Unset: infinite when strongly convex, from_anchor otherwise.
  std::optional<RPolicy> r_policy;

  RPolicy resolved_r_policy() const {
    return r_policy.value_or(strongly_convex ? RPolicy::infinite : RPolicy::from_anchor);
  }
};

struct QpInstance {
  VectorXd D;
  VectorXd q;
  MatrixXd A;
  VectorXd a;
  VectorXd b;
  double r = kInf;
  VectorXd anchor;  // x-natural: A*anchor lies strictly inside [a, b]

  ProblemSpec to_spec() const { return reformulate_qp(D, q, A, a, b, r); }
};

/// mt19937_64 with fixed conversions: uniforms on the open interval (0,1) from
/// the top 53 bits, normals by Box-Muller (cosine branch, two uniforms each).
class InstanceRng {
 public:
  explicit InstanceRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

inline void check_recipe(const InstanceRecipe& r) {
  if (r.n < 1 || r.p1 < 1) throw Error(ErrorCode::invalid_config, "n and p1 must be >= 1");
}

/// Stream order: A (row-major), anchor, u1, u2, D values, D zero mask, q.
inline QpInstance generate(const InstanceRecipe& recipe) {
  check_recipe(recipe);
  const Index n = recipe.n;
  const Index p = recipe.p1;
  InstanceRng rng(recipe.seed);
  QpInstance inst;
  inst.A.resize(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) inst.A(i, j) = rng.normal();
  inst.anchor.resize(p);
  for (Index j = 0; j < p; ++j) inst.anchor[j] = rng.normal();
  VectorXd u1(n), u2(n);
  for (Index i = 0; i < n; ++i) u1[i] = rng.uniform();
  for (Index i = 0; i < n; ++i) u2[i] = rng.uniform();
  const VectorXd ax = inst.A * inst.anchor;
  inst.a = ax - u1;
  inst.b = ax + u2;

  inst.D.resize(p);
  for (Index j = 0; j < p; ++j) inst.D[j] = rng.uniform();
  if (recipe.strongly_convex) {
    inst.D.array() += 0.1;
  } else {
    // each entry zeroed with probability 1/2; one extra draw picks the entry
    // to zero when the mask came out empty
    bool any = false;
    for (Index j = 0; j < p; ++j) {
      if (rng.uniform() < 0.5) {
        inst.D[j] = 0.0;
        any = true;
      }
    }
    const double pick = rng.uniform();
    if (!any) inst.D[std::min<Index>(p - 1, static_cast<Index>(pick * static_cast<double>(p)))] = 0.0;
  }
  inst.q.resize(p);
  for (Index j = 0; j < p; ++j) inst.q[j] = rng.normal();

  inst.r = recipe.resolved_r_policy() == RPolicy::infinite ? kInf : inst.anchor.lpNorm<Eigen::Infinity>();
  return inst;
}

struct ReferenceSolution {
  double f_star = 0.0;
  PrimalPoint x_star;
  VectorXd lambda_star;
  /// Active bound inequalities; variable j of z = (u, v) contributes 2j
  /// (lower) or 2j+1 (upper).
  std::vector<int> active_set;
  double kkt_residual = 0.0;
};

inline constexpr int kOracleMaxVars = 12;

/// Enumerates every free/lower/upper assignment of z = (u, v), solves the
/// equality-constrained KKT system of each and keeps the feasible one with
/// valid multiplier signs and least objective. Ties keep the first assignment
/// in base-3 order.
inline ReferenceSolution oracle_solve(const ProblemSpec& spec) {
  validate(spec);
  const Index p1 = spec.p1();
  const Index p2 = spec.p2();
  const Index m = p1 + p2;
  const Index n = spec.rows();
  if (m > kOracleMaxVars) {
    throw Error(ErrorCode::too_large, "oracle handles p1 + p2 <= 12, got " + std::to_string(m));
  }

  VectorXd lo(m), up(m), hdiag(m), lin(m);
  lo << spec.U.lower, spec.V.lower;
  up << spec.U.upper, spec.V.upper;
  hdiag << spec.g.diag.array().square().matrix(), VectorXd::Zero(p2);
  lin << (spec.g.diag.array() * spec.g.shift.array()).matrix(), VectorXd::Zero(p2);
  MatrixXd E(n, m);
  E << spec.A, spec.B;

  auto f_of = [&](const VectorXd& z) { return spec.g.value(z.head(p1)); };

  std::int64_t total = 1;
  for (Index j = 0; j < m; ++j) total *= 3;

  std::optional<ReferenceSolution> best;
  std::vector<int> state(static_cast<std::size_t>(m));
  std::vector<Index> free_idx;
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t c = code;
    bool usable = true;
    for (Index j = m - 1; j >= 0; --j) {
      state[static_cast<std::size_t>(j)] = static_cast<int>(c % 3);
      c /= 3;
    }
    VectorXd z = VectorXd::Zero(m);
    free_idx.clear();
    for (Index j = 0; j < m; ++j) {
      const int s = state[static_cast<std::size_t>(j)];
      if (s == 0) {
        free_idx.push_back(j);
      } else {
        const double bnd = s == 1 ? lo[j] : up[j];
        if (!std::isfinite(bnd)) {
          usable = false;
          break;
        }
        z[j] = bnd;
      }
    }
    if (!usable) continue;

    const Index nf = static_cast<Index>(free_idx.size());
    MatrixXd K = MatrixXd::Zero(nf + n, nf + n);
    VectorXd rhs(nf + n);
    const VectorXd Ez_fixed = E * z;
    for (Index a = 0; a < nf; ++a) {
      const Index j = free_idx[static_cast<std::size_t>(a)];
      K(a, a) = hdiag[j];
      for (Index i = 0; i < n; ++i) {
        K(a, nf + i) = -E(i, j);
        K(nf + i, a) = E(i, j);
      }
      rhs[a] = lin[j];
    }
    rhs.tail(n) = spec.c - Ez_fixed;
    Eigen::FullPivLU<MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const VectorXd sol = lu.solve(rhs);
    for (Index a = 0; a < nf; ++a) z[free_idx[static_cast<std::size_t>(a)]] = sol[a];
    const VectorXd lambda = sol.tail(n);

    bool ok = true;
    for (Index j = 0; j < m && ok; ++j) {
      const double slack = 1e-9 * std::max(1.0, std::abs(z[j]));
      if (z[j] < lo[j] - slack || z[j] > up[j] + slack) ok = false;
    }
    if (!ok) continue;
    // stationarity residual r = H z - lin - E^T lambda; lower multiplier r_j,
    // upper multiplier -r_j
    const VectorXd r = (hdiag.array() * z.array()).matrix() - lin - E.transpose() * lambda;
    std::vector<int> active;
    for (Index j = 0; j < m && ok; ++j) {
      const int s = state[static_cast<std::size_t>(j)];
      if (s == 1) {
        if (r[j] < -1e-12) ok = false;
        active.push_back(static_cast<int>(2 * j));
      } else if (s == 2) {
        if (-r[j] < -1e-12) ok = false;
        active.push_back(static_cast<int>(2 * j + 1));
      }
    }
    if (!ok) continue;

    for (Index j = 0; j < m; ++j) z[j] = std::clamp(z[j], lo[j], up[j]);
    const double f = f_of(z);
    if (best && !(f < best->f_star - 1e-12 * std::max(1.0, std::abs(best->f_star)))) continue;

    ReferenceSolution rs;
    rs.f_star = f;
    rs.x_star = PrimalPoint{z.head(p1), z.tail(p2)};
    rs.lambda_star = lambda;
    rs.active_set = std::move(active);
    double res = (E * z - spec.c).norm();
    for (Index j = 0; j < m; ++j) {
      if (state[static_cast<std::size_t>(j)] == 0) res = std::max(res, std::abs(r[j]));
    }
    rs.kkt_residual = res;
    best = std::move(rs);
  }
  if (!best) throw Error(ErrorCode::infeasible, "no active set passed the KKT checks");
  return *best;
}

// ---- experiment -----------------------------------------------------------

struct ExperimentConfig {
  std::vector<Algorithm> algorithms{Algorithm::ama, Algorithm::fama};
  std::vector<MomentumMode> momenta{MomentumMode::paper};
  int max_iter = 1000;
  double epsilon = 1e-2;
  StepPolicy step = StepPolicy::fixed;
};

struct SeriesPoint {
  int k = 0;
  double obj_err = 0.0;
  double obj_bound = 0.0;
  double feas = 0.0;
  double feas_bound = 0.0;
};

struct ExperimentRun {
  Variant variant;
  MomentumMode momentum = MomentumMode::paper;
  std::string theorem;  // "thm31", "thm41", "cor51", "cor51_accel"
  bool pass = false;
  std::optional<int> first_violation;
  std::string condition;
  std::optional<std::int64_t> predicted;
  std::optional<int> first_eps_k;  // first k with an eps-solution in the trace
  double final_f = 0.0;
  double final_feas = 0.0;
  Trace trace;
  std::vector<SeriesPoint> series;
};

struct ExperimentReport {
  InstanceRecipe recipe;
  QpInstance instance;
  ReferenceSolution reference;
  CertificateInputs inputs;  // gamma left at 0; each run carries its own
  ExperimentConfig config;
  std::vector<ExperimentRun> runs;

  bool all_pass() const {
    for (const auto& r : runs)
      if (!r.pass) return false;
    return !runs.empty();
  }
};

inline std::string theorem_name(const Variant& v) {
  if (v.regime == Regime::strongly_convex) {
    return v.algorithm == Algorithm::ama ? "cor51" : "cor51_accel";
  }
  return v.algorithm == Algorithm::ama ? "thm31" : "thm41";
}

/// Inputs for the bound formulas from an oracle solution; gamma is filled in
/// per run.
inline CertificateInputs certificate_inputs(const ProblemSpec& spec, const ReferenceSolution& ref) {
  CertificateInputs in;
  in.f_star = ref.f_star;
  in.lambda_star = ref.lambda_star;
  in.lambda0 = VectorXd::Zero(spec.rows());
  in.mu_p = 1.0;
  in.norm_A = spectral_norm(spec.A);
  in.mu_g = spec.g.strong_convexity();
  in.d_u = spec.U.is_bounded() ? prox_diameter(spec.U, spec.U.midpoint()) : kInf;
  return in;
}

inline ExperimentReport run_experiment(const InstanceRecipe& recipe, const ExperimentConfig& cfg) {
  check_recipe(recipe);
  if (recipe.n + recipe.p1 > kOracleMaxVars) {
    throw Error(ErrorCode::too_large, "n + p1 must be <= 12 for the oracle");
  }
  ExperimentReport rep;
  rep.recipe = recipe;
  rep.config = cfg;
  rep.instance = generate(recipe);
  const ProblemSpec spec = rep.instance.to_spec();
  rep.reference = oracle_solve(spec);
  rep.inputs = certificate_inputs(spec, rep.reference);
  const Regime regime = recipe.strongly_convex ? Regime::strongly_convex : Regime::smoothed;

  for (Algorithm alg : cfg.algorithms) {
    std::vector<MomentumMode> modes{MomentumMode::paper};
    if (alg == Algorithm::fama) modes = cfg.momenta;
    for (MomentumMode mode : modes) {
      SolverConfig sc;
      sc.variant = {alg, regime};
      sc.epsilon = cfg.epsilon;
      sc.step = cfg.step;
      sc.max_iter = cfg.max_iter;
      sc.momentum = mode;
      RunResult rr = run(spec, sc);

      ExperimentRun er;
      er.variant = sc.variant;
      er.momentum = mode;
      er.theorem = theorem_name(sc.variant);
      CertificateInputs in = rep.inputs;
      in.gamma = rr.trace.info.gamma;
      const CheckReport cr = check_trace(rr.trace, in, sc.variant);
      er.pass = cr.pass;
      er.first_violation = cr.first_violation;
      er.condition = cr.condition;
      try {
        er.predicted = predict_iterations(sc.variant, cfg.epsilon, in, cfg.step == StepPolicy::line_search);
      } catch (const Error&) {
        er.predicted.reset();
      }
      for (std::size_t i = 0; i < rr.trace.records.size(); ++i) {
        const auto& r = rr.trace.records[i];
        const auto& c = cr.per_k[i];
        er.series.push_back({r.k, r.f_avg - in.f_star, c.bound.obj_bound, r.feas, c.bound.feas_bound});
        if (!er.first_eps_k && is_eps_solution(r.f_avg, in.f_star, r.feas, cfg.epsilon)) {
          er.first_eps_k = r.k;
        }
      }
      if (!rr.trace.records.empty()) {
        er.final_f = rr.trace.records.back().f_avg;
        er.final_feas = rr.trace.records.back().feas;
      }
      er.trace = std::move(rr.trace);
      rep.runs.push_back(std::move(er));
    }
  }
  return rep;
}

}  // namespace pdama
