#pragma once

// Primal-dual alternating minimization (AMA) on the smoothed dual, its
// accelerated (FISTA-type) variant, and the strongly convex variants that use
// the exact u-sharp operator instead of smoothing. The primal sequence is the
// weighted average of (u_tilde^k, v_tilde^k).

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdama/core_model.hpp"
#include "pdama/operators.hpp"

namespace pdama {

enum class Algorithm { ama, fama };
enum class Regime { smoothed, strongly_convex };
enum class StepPolicy { fixed, line_search };
enum class MomentumMode { paper, classic };
enum class GammaPolicy { auto_thm31, auto_thm41, explicit_value };

struct Variant {
  Algorithm algorithm = Algorithm::ama;
  Regime regime = Regime::smoothed;

  bool operator==(const Variant&) const = default;
};

inline const char* to_string(Algorithm a) { return a == Algorithm::ama ? "ama" : "fama"; }
inline const char* to_string(Regime r) {
  return r == Regime::smoothed ? "smoothed" : "strongly_convex";
}
inline const char* to_string(StepPolicy s) {
  return s == StepPolicy::fixed ? "fixed" : "line_search";
}
inline const char* to_string(MomentumMode m) {
  return m == MomentumMode::paper ? "paper" : "classic";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "ama") return Algorithm::ama;
  if (s == "fama") return Algorithm::fama;
  return std::nullopt;
}
inline std::optional<Regime> parse_regime(std::string_view s) {
  if (s == "smoothed") return Regime::smoothed;
  if (s == "strongly_convex" || s == "strongly-convex") return Regime::strongly_convex;
  return std::nullopt;
}
inline std::optional<StepPolicy> parse_step_policy(std::string_view s) {
  if (s == "fixed") return StepPolicy::fixed;
  if (s == "line_search" || s == "line-search") return StepPolicy::line_search;
  return std::nullopt;
}
inline std::optional<MomentumMode> parse_momentum(std::string_view s) {
  if (s == "paper") return MomentumMode::paper;
  if (s == "classic") return MomentumMode::classic;
  return std::nullopt;
}

struct SolverConfig {
  Variant variant;
  double epsilon = 1e-2;
  /// Unset: auto_thm31 for ama, auto_thm41 for fama.
  std::optional<GammaPolicy> gamma_policy;
  double gamma = 0.0;  // used by GammaPolicy::explicit_value
  StepPolicy step = StepPolicy::fixed;
  /// Line-search floor; unset means 1e-3 times the step Lipschitz constant.
  std::optional<double> lower_L;
  int max_iter = 1000;
  MomentumMode momentum = MomentumMode::paper;
  bool swap_sides = false;
  /// Known optimal value; enables stopping at the first epsilon-solution.
  std::optional<double> f_star;
  std::optional<VectorXd> lambda0;
  /// When false only the last iteration is kept (and dual diagnostics are
  /// evaluated only there).
  bool record_trace = true;
};

/// gamma = eps/(2 D_U) for the plain scheme, eps/D_U for the accelerated one.
inline double auto_gamma(GammaPolicy policy, double epsilon, double d_u) {
  if (!(d_u > 0.0) || !std::isfinite(d_u)) {
    throw Error(ErrorCode::invalid_config, "automatic gamma needs 0 < D_U < inf");
  }
  switch (policy) {
    case GammaPolicy::auto_thm31: return epsilon / (2.0 * d_u);
    case GammaPolicy::auto_thm41: return epsilon / d_u;
    case GammaPolicy::explicit_value: break;
  }
  throw Error(ErrorCode::invalid_config, "explicit gamma has no automatic value");
}

inline GammaPolicy default_gamma_policy(Algorithm a) {
  return a == Algorithm::ama ? GammaPolicy::auto_thm31 : GammaPolicy::auto_thm41;
}

/// Constants fixed before the first iteration.
struct SolverSetup {
  Regime regime = Regime::smoothed;
  double gamma = 0.0;  // 0 in the strongly convex regime
  VectorXd center;
  double mu = 1.0;  // mu_p (smoothed) or mu_g (strongly convex)
  double mu_g = 0.0;
  double norm_A = 0.0;
  double d_u = kInf;
  double lipschitz = 0.0;  // ||A||^2/(gamma mu_p) or ||A||^2/mu_g
  double lower_L = 0.0;

  SmoothingSetup smoothing() const {
    SmoothingSetup s;
    s.center = center;
    s.mu_p = 1.0;
    s.gamma = gamma;
    s.d_u = d_u;
    s.norm_A = norm_A;
    s.lipschitz_base = norm_A * norm_A;
    s.lipschitz_smoothed = gamma > 0.0 ? norm_A * norm_A / gamma : kInf;
    return s;
  }
};

inline SolverSetup make_setup(const ProblemSpec& spec, const SolverConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::invalid_config, "epsilon must be positive");
  if (cfg.max_iter < 0) throw Error(ErrorCode::invalid_config, "max_iter must be >= 0");

  SolverSetup s;
  s.regime = cfg.variant.regime;
  s.norm_A = spectral_norm(spec.A);
  s.mu_g = spec.g.strong_convexity();
  s.center = spec.U.midpoint();
  if (spec.U.is_bounded()) s.d_u = prox_diameter(spec.U, s.center);

  if (s.regime == Regime::smoothed) {
    if (!spec.U.is_bounded()) throw Error(ErrorCode::not_smoothable, "smoothing needs a bounded U");
    const GammaPolicy policy = cfg.gamma_policy.value_or(default_gamma_policy(cfg.variant.algorithm));
    s.gamma = policy == GammaPolicy::explicit_value ? cfg.gamma : auto_gamma(policy, cfg.epsilon, s.d_u);
    if (!(s.gamma > 0.0) || !std::isfinite(s.gamma)) {
      throw Error(ErrorCode::invalid_config, "gamma must be positive and finite");
    }
    s.mu = 1.0;
    s.lipschitz = s.norm_A * s.norm_A / (s.gamma * s.mu);
  } else {
    if (!spec.g.is_strongly_convex()) {
      throw Error(ErrorCode::not_strongly_convex, "strongly convex variant needs mu_g > 0");
    }
    s.gamma = 0.0;
    s.mu = s.mu_g;
    s.lipschitz = s.norm_A * s.norm_A / s.mu_g;
  }
  if (!(s.lipschitz > 0.0)) throw Error(ErrorCode::invalid_config, "A must be nonzero");

  s.lower_L = cfg.lower_L.value_or(1e-3 * s.lipschitz);
  if (!(s.lower_L > 0.0) || s.lower_L > s.lipschitz) {
    throw Error(ErrorCode::invalid_config, "lower_L must lie in (0, L]");
  }
  return s;
}

struct SolverState {
  int k = 0;
  VectorXd lambda;      // lambda^k
  VectorXd lambda_hat;  // equals lambda for the plain scheme
  double t = 1.0;
  double s_weight = 0.0;
  VectorXd u_bar;
  VectorXd v_bar;
  double eta_prev = kInf;
  double L_prev = 0.0;
};

inline SolverState initial_state(const ProblemSpec& spec, const SolverSetup& setup,
                                 const std::optional<VectorXd>& lambda0 = std::nullopt) {
  SolverState st;
  st.lambda = lambda0 ? *lambda0 : VectorXd::Zero(spec.rows());
  if (st.lambda.size() != spec.rows()) {
    throw Error(ErrorCode::dimension_mismatch, "lambda0 length != rows of A");
  }
  st.lambda_hat = st.lambda;
  st.u_bar = VectorXd::Zero(spec.p1());
  st.v_bar = VectorXd::Zero(spec.p2());
  st.L_prev = setup.lower_L;
  return st;
}

struct IterationRecord {
  int k = 0;
  double eta = 0.0;
  double f_avg = 0.0;
  double feas = 0.0;
  double d_gamma = 0.0;
  double d_plain = 0.0;
  bool lemma_ok = true;
  int linesearch_evals = 1;
  int tie_count = 0;
};

/// Intermediate quantities of one iteration, for diagnostics and tests.
struct StepDetail {
  VectorXd lambda_hat;  // point the oracles were evaluated at
  VectorXd u_tilde;
  VectorXd v_hat;
  VectorXd v_tilde;
  std::vector<bool> tie_mask;
  double weight = 0.0;
  double L = 0.0;
  double d1_next = 0.0;
  double surrogate = 0.0;
};

struct TraceInfo {
  Variant variant;
  StepPolicy step = StepPolicy::fixed;
  MomentumMode momentum = MomentumMode::paper;
  double gamma = 0.0;
  double epsilon = 0.0;
  double norm_A = 0.0;
  double d_u = kInf;
  double mu_g = 0.0;
  double mu_p = 1.0;
};

struct Trace {
  TraceInfo info;
  std::vector<IterationRecord> records;
};

namespace detail {

inline constexpr int kMaxDoublings = 60;
inline constexpr double kMinStep = 1e-18;
inline constexpr double kLemmaTol = 1e-9;

// d1_gamma (gamma may be 0) at lambda, given s = A^T lambda and its minimizer u.
inline double d1_at(const ProblemSpec& spec, const SolverSetup& setup, const VectorXd& s,
                    const VectorXd& u) {
  double val = spec.g.value(u) - s.dot(u);
  if (setup.gamma > 0.0) val += 0.5 * setup.gamma * (u - setup.center).squaredNorm();
  return val;
}

inline double d1_at(const ProblemSpec& spec, const SolverSetup& setup, const VectorXd& lambda) {
  const VectorXd s = spec.A.transpose() * lambda;
  return d1_at(spec, setup, s, u_argmin(spec, setup.gamma, setup.center, s));
}

inline IterationRecord step(SolverState& st, const ProblemSpec& spec, const SolverSetup& setup,
                            const SolverConfig& cfg, bool accelerated, bool diagnostics,
                            StepDetail* out) {
  const VectorXd lh = st.lambda_hat;  // copy: st.lambda_hat is overwritten below
  const VectorXd s = spec.A.transpose() * lh;
  const VectorXd u_t = u_argmin(spec, setup.gamma, setup.center, s);
  const VectorXd Au = spec.A * u_t;
  const double d1_hat = d1_at(spec, setup, s, u_t);

  VectorXd v_hat;
  VectorXd lam_next;
  auto trial = [&](double eta) {
    v_hat = v_subproblem(spec, lh, u_t, eta);
    lam_next = lh + eta * (spec.c - Au - spec.B * v_hat);
  };
  // Q_L(lam_next; lh) with grad d1_gamma(lh) = -A u_t.
  auto surrogate = [&](double L) {
    const VectorXd diff = lam_next - lh;
    return d1_hat - Au.dot(diff) - 0.5 * L * diff.squaredNorm();
  };

  IterationRecord rec;
  rec.k = st.k;
  double L = setup.lipschitz;
  double d1_next = 0.0;
  bool have_d1_next = false;
  if (cfg.step == StepPolicy::fixed) {
    trial(1.0 / L);
    rec.linesearch_evals = 1;
  } else {
    L = accelerated ? std::max(setup.lower_L, st.L_prev) : std::max(setup.lower_L, 0.5 * st.L_prev);
    int evals = 0;
    for (;;) {
      if (evals > kMaxDoublings || 1.0 / L < kMinStep) {
        throw Error(ErrorCode::step_too_small, "line-search exhausted at k=" + std::to_string(st.k));
      }
      trial(1.0 / L);
      ++evals;
      d1_next = d1_at(spec, setup, lam_next);
      const double slack = 1e-12 * std::max(1.0, std::abs(d1_hat));
      if (d1_next >= surrogate(L) - slack) break;
      L *= 2.0;
    }
    have_d1_next = true;
    rec.linesearch_evals = evals;
  }
  const double eta = 1.0 / L;
  if (eta < kMinStep) throw Error(ErrorCode::step_too_small, "step below 1e-18");
  rec.eta = eta;

  const VectorXd btl = spec.B.transpose() * lam_next;
  SharpResult v_sharp = sharp_v(spec, btl, &v_hat);
  rec.tie_count = v_sharp.tie_count();

  const double w = accelerated ? eta * st.t : eta;
  st.s_weight += w;
  const double tau = w / st.s_weight;
  st.u_bar = (1.0 - tau) * st.u_bar + tau * u_t;
  st.v_bar = (1.0 - tau) * st.v_bar + tau * v_sharp.point;

  if (accelerated) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * st.t * st.t));
    const double beta = (st.t - 1.0) / t_next;
    const VectorXd delta =
        cfg.momentum == MomentumMode::paper ? VectorXd(lam_next - lh) : VectorXd(lam_next - st.lambda);
    st.lambda_hat = lam_next + beta * delta;
    st.lambda = lam_next;
    st.t = t_next;
  } else {
    st.lambda = lam_next;
    st.lambda_hat = st.lambda;
  }

  const PrimalPoint x_bar{st.u_bar, st.v_bar};
  rec.f_avg = objective(spec, x_bar);
  rec.feas = feasibility_gap(spec, x_bar);
  if (diagnostics || out) {
    if (!have_d1_next) d1_next = d1_at(spec, setup, st.lambda);
    const double q = surrogate(L);
    rec.lemma_ok = d1_next >= q - kLemmaTol;
    const double d2 = detail::d2_from_s(spec.V, btl);
    const double lin = spec.c.dot(st.lambda);
    rec.d_gamma = d1_next + d2 + lin;
    rec.d_plain = setup.gamma > 0.0 ? d1_from_s(spec, spec.A.transpose() * st.lambda) + d2 + lin
                                    : rec.d_gamma;
    if (out) {
      out->lambda_hat = lh;
      out->u_tilde = u_t;
      out->v_hat = v_hat;
      out->v_tilde = v_sharp.point;
      out->tie_mask = v_sharp.tie_mask;
      out->weight = w;
      out->L = L;
      out->d1_next = d1_next;
      out->surrogate = q;
    }
  }

  st.eta_prev = eta;
  st.L_prev = L;
  ++st.k;
  return rec;
}

}  // namespace detail

/// One iteration of the non-accelerated scheme (weights w_k = eta_k).
inline IterationRecord step_ama(SolverState& state, const ProblemSpec& spec,
                                const SolverSetup& setup, const SolverConfig& cfg,
                                StepDetail* detail_out = nullptr) {
  return detail::step(state, spec, setup, cfg, false, true, detail_out);
}

/// One iteration of the accelerated scheme (weights w_k = eta_k t_k).
inline IterationRecord step_ama_accel(SolverState& state, const ProblemSpec& spec,
                                      const SolverSetup& setup, const SolverConfig& cfg,
                                      StepDetail* detail_out = nullptr) {
  return detail::step(state, spec, setup, cfg, true, true, detail_out);
}

/// Backtracking search for the dual step at lambda_hat: starts at
/// max(lower_L, prev_L/2) and doubles L until the surrogate condition holds.
struct LineSearchResult {
  double eta = 0.0;
  double L = 0.0;
  int evals = 0;
};

inline LineSearchResult line_search_eta(const ProblemSpec& spec, const SmoothingSetup& sm,
                                        const VectorXd& lambda_hat, double prev_L, double lower_L) {
  if (!(lower_L > 0.0)) throw Error(ErrorCode::invalid_config, "lower_L must be positive");
  const VectorXd u_t = smoothed_u_argmin(spec, sm, lambda_hat);
  const VectorXd Au = spec.A * u_t;
  const double d1_hat = d1_gamma_value(spec, sm, lambda_hat);
  double L = std::max(lower_L, 0.5 * prev_L);
  for (int evals = 1; evals <= detail::kMaxDoublings + 1; ++evals) {
    const double eta = 1.0 / L;
    if (eta < detail::kMinStep) break;
    const VectorXd v_hat = v_subproblem(spec, lambda_hat, u_t, eta);
    const VectorXd next = lambda_hat + eta * (spec.c - Au - spec.B * v_hat);
    const VectorXd diff = next - lambda_hat;
    const double q = d1_hat - Au.dot(diff) - 0.5 * L * diff.squaredNorm();
    if (d1_gamma_value(spec, sm, next) >= q - 1e-12 * std::max(1.0, std::abs(d1_hat))) {
      return {eta, L, evals};
    }
    L *= 2.0;
  }
  throw Error(ErrorCode::step_too_small, "line-search exhausted");
}

/// Exchanges (g, U, A) with (h, V, B). Only admissible inside the supported
/// class: g must be constant (zero diagonal), A^T A diagonal and U bounded.
/// The constant 1/2||q||^2 moves into the new shift vector.
inline std::optional<ProblemSpec> swap_sides(const ProblemSpec& spec) {
  if ((spec.g.diag.array() != 0.0).any()) return std::nullopt;
  if (!spec.U.is_bounded() || !detail::btb_is_diagonal(spec.A)) return std::nullopt;
  ProblemSpec out;
  out.A = spec.B;
  out.B = spec.A;
  out.c = spec.c;
  out.g.diag = VectorXd::Zero(spec.p2());
  out.g.shift = VectorXd::Zero(spec.p2());
  out.g.shift[0] = spec.g.shift.norm();
  out.h_is_zero_indicator = true;
  out.U = spec.V;
  out.V = spec.U;
  return out;
}

struct RunResult {
  Trace trace;
  PrimalPoint x_bar;
  VectorXd lambda;
  bool valid = false;  // false when no iteration ran
  bool swapped = false;
  bool eps_reached = false;
  int iterations = 0;
};

inline RunResult run(const ProblemSpec& spec_in, const SolverConfig& cfg) {
  validate(spec_in);

  RunResult res;
  ProblemSpec spec = spec_in;
  if (cfg.swap_sides && cfg.variant.regime == Regime::smoothed && spec.U.is_bounded()) {
    const double du = prox_diameter(spec.U, spec.U.midpoint());
    const double dv = prox_diameter(spec.V, spec.V.midpoint());
    if (dv < du) {
      if (auto swapped = swap_sides(spec)) {
        spec = *swapped;
        res.swapped = true;
      }
    }
  }

  const SolverSetup setup = make_setup(spec, cfg);
  res.trace.info = TraceInfo{cfg.variant, cfg.step, cfg.momentum, setup.gamma, cfg.epsilon,
                             setup.norm_A, setup.d_u, setup.mu_g, 1.0};

  SolverState st = initial_state(spec, setup, cfg.lambda0);
  const bool accelerated = cfg.variant.algorithm == Algorithm::fama;
  IterationRecord last;
  for (int k = 0; k < cfg.max_iter; ++k) {
    const bool final_iter = k + 1 == cfg.max_iter;
    last = detail::step(st, spec, setup, cfg, accelerated, cfg.record_trace || final_iter, nullptr);
    if (cfg.record_trace) res.trace.records.push_back(last);
    ++res.iterations;
    if (cfg.f_star && std::abs(last.f_avg - *cfg.f_star) <= cfg.epsilon && last.feas <= cfg.epsilon) {
      res.eps_reached = true;
      if (!cfg.record_trace) res.trace.records.push_back(last);
      break;
    }
  }
  if (!cfg.record_trace && !res.eps_reached && res.iterations > 0) res.trace.records.push_back(last);

  res.valid = res.iterations > 0;
  res.lambda = st.lambda;
  if (res.swapped) {
    res.x_bar = PrimalPoint{st.v_bar, st.u_bar};
  } else {
    res.x_bar = PrimalPoint{st.u_bar, st.v_bar};
  }
  return res;
}

}  // namespace pdama
