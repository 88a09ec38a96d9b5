#pragma once

// Executable forms of the primal convergence bounds and a checker that holds
// a trace against them.

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdama/solver.hpp"

namespace pdama {

struct CertificateInputs {
  double f_star = 0.0;
  VectorXd lambda_star;
  VectorXd lambda0;
  double d_u = 0.0;
  double mu_p = 1.0;
  double norm_A = 0.0;
  double mu_g = 0.0;
  double gamma = 0.0;

  double lipschitz_base() const { return norm_A * norm_A / mu_p; }
  double lipschitz_strong() const { return norm_A * norm_A / mu_g; }
};

struct BoundPair {
  double obj_bound = 0.0;
  double feas_bound = 0.0;

  double worst() const { return std::max(obj_bound, feas_bound); }
};

namespace detail {

struct NormTerms {
  double l0 = 0.0;     // ||lambda0||
  double ls = 0.0;     // ||lambda*||
  double dist = 0.0;   // ||lambda0 - lambda*||
};

inline NormTerms norm_terms(const CertificateInputs& in) {
  NormTerms t;
  const VectorXd l0 = in.lambda0.size() ? in.lambda0 : VectorXd::Zero(in.lambda_star.size());
  if (l0.size() != in.lambda_star.size()) {
    throw Error(ErrorCode::dimension_mismatch, "lambda0 and lambda_star differ in length");
  }
  t.l0 = l0.norm();
  t.ls = in.lambda_star.norm();
  t.dist = (l0 - in.lambda_star).norm();
  return t;
}

inline void require_smoothing_inputs(const CertificateInputs& in) {
  if (!(in.gamma > 0.0) || !std::isfinite(in.d_u) || !(in.mu_p > 0.0)) {
    throw Error(ErrorCode::invalid_config, "smoothed bounds need gamma > 0, finite D_U, mu_p > 0");
  }
}

}  // namespace detail

/// Non-accelerated smoothed scheme, O(1/k) up to the floor gamma D_U.
inline BoundPair bound_thm31(double k, const CertificateInputs& in, bool line_search = false) {
  detail::require_smoothing_inputs(in);
  const auto t = detail::norm_terms(in);
  const double L = (line_search ? 2.0 : 1.0) * in.lipschitz_base();
  const double g = in.gamma;
  const double D = in.d_u;
  const double k1 = k + 1.0;
  BoundPair b;
  b.obj_bound = std::max(L * t.l0 * t.l0 / (g * k1) + g * D,
                         2.0 * L * t.ls * t.dist / (g * k1) + t.ls * std::sqrt(L * D / k1));
  b.feas_bound = 2.0 * L * t.dist / (g * k1) + std::sqrt(L * D / k1);
  return b;
}

/// Accelerated smoothed scheme, O(1/k^2) up to the floor gamma D_U.
inline BoundPair bound_thm41(double k, const CertificateInputs& in, bool line_search = false) {
  detail::require_smoothing_inputs(in);
  const auto t = detail::norm_terms(in);
  const double L = (line_search ? 2.0 : 1.0) * in.lipschitz_base();
  const double g = in.gamma;
  const double D = in.d_u;
  const double kk = (k + 1.0) * (k + 2.0);
  BoundPair b;
  b.obj_bound = std::max(2.0 * L * t.l0 * t.l0 / (g * kk) + g * D,
                         8.0 * L * t.ls * t.dist / (g * kk) + t.ls * std::sqrt(4.0 * L * D / kk));
  b.feas_bound = 8.0 * L * t.dist / (g * kk) + std::sqrt(4.0 * L * D / kk);
  return b;
}

/// Strongly convex variants (no smoothing).
inline BoundPair bound_cor51(double k, const CertificateInputs& in, bool accelerated,
                             bool line_search = false) {
  if (!(in.mu_g > 0.0)) throw Error(ErrorCode::not_strongly_convex, "bound needs mu_g > 0");
  const auto t = detail::norm_terms(in);
  const double a2 = (line_search ? 2.0 : 1.0) * in.norm_A * in.norm_A;
  BoundPair b;
  if (!accelerated) {
    const double den = in.mu_g * (k + 1.0);
    b.obj_bound = a2 / den * std::max(t.l0 * t.l0, 2.0 * t.ls * t.dist);
    b.feas_bound = 2.0 * a2 * t.dist / den;
  } else {
    const double den = in.mu_g * (k + 1.0) * (k + 2.0);
    b.obj_bound = 2.0 * a2 / den * std::max(t.l0 * t.l0, 4.0 * t.ls * t.dist);
    b.feas_bound = 8.0 * a2 * t.dist / den;
  }
  return b;
}

/// Bound matching the scheme that produced a trace.
inline BoundPair bound_for(const Variant& v, double k, const CertificateInputs& in,
                           bool line_search = false) {
  if (v.regime == Regime::strongly_convex) {
    return bound_cor51(k, in, v.algorithm == Algorithm::fama, line_search);
  }
  return v.algorithm == Algorithm::ama ? bound_thm31(k, in, line_search)
                                       : bound_thm41(k, in, line_search);
}

/// max(obj, feas) <= eps, allowing a few ulps so that the exact smoothing floor
/// gamma D_U = eps of the accelerated auto policy counts as reached.
inline bool bound_meets(const BoundPair& b, double eps) {
  return b.worst() <= eps * (1.0 + 4.0 * DBL_EPSILON);
}

/// Same inputs with gamma from the automatic policy of the given scheme.
inline CertificateInputs with_auto_gamma(CertificateInputs in, const Variant& v, double eps) {
  if (v.regime == Regime::smoothed) {
    in.gamma = auto_gamma(v.algorithm == Algorithm::ama ? GammaPolicy::auto_thm31 : GammaPolicy::auto_thm41,
                          eps, in.d_u);
  }
  return in;
}

/// Least k whose bound pair is within eps; binary search over [0, 2^62].
inline std::int64_t predict_iterations(const Variant& v, double eps, const CertificateInputs& in,
                                       bool line_search = false) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_config, "epsilon must be positive");
  auto ok = [&](std::int64_t k) {
    return bound_meets(bound_for(v, static_cast<double>(k), in, line_search), eps);
  };
  if (v.regime == Regime::smoothed && in.gamma * in.d_u > eps * (1.0 + 4.0 * DBL_EPSILON)) {
    throw Error(ErrorCode::unreachable, "smoothing floor gamma*D_U exceeds epsilon");
  }
  std::int64_t hi = std::int64_t{1} << 62;
  if (!ok(hi)) throw Error(ErrorCode::unreachable, "bound stays above epsilon up to 2^62");
  std::int64_t lo = 0;
  if (ok(lo)) return 0;
  // invariant: !ok(lo), ok(hi)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

struct CheckTolerance {
  double rel = 1e-6;
  double abs = 1e-9;
};

struct KCheck {
  int k = 0;
  bool obj_ok = true;
  bool feas_ok = true;
  bool lower_ok = true;
  BoundPair bound;

  bool ok() const { return obj_ok && feas_ok && lower_ok; }
};

struct CheckReport {
  bool pass = true;
  std::optional<int> first_violation;
  std::string condition;  // "objective", "feasibility" or "lower_bound"
  std::vector<KCheck> per_k;
  std::optional<std::int64_t> predicted_thm31;
  std::optional<std::int64_t> predicted_thm41;
  std::optional<std::int64_t> predicted_cor51;
  std::optional<std::int64_t> predicted_cor51_accel;
};

namespace detail {

inline std::optional<std::int64_t> try_predict(const Variant& v, double eps,
                                               const CertificateInputs& in, bool ls) {
  try {
    return predict_iterations(v, eps, with_auto_gamma(in, v, eps), ls);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Checks every record independently against the bound of `expected`.
inline CheckReport check_trace(const Trace& trace, const CertificateInputs& in,
                               const Variant& expected, CheckTolerance tol = {}) {
  if (!(trace.info.variant == expected)) {
    throw Error(ErrorCode::trace_variant_mismatch,
                std::string("trace is ") + to_string(trace.info.variant.algorithm) + "/" +
                    to_string(trace.info.variant.regime) + ", expected " +
                    to_string(expected.algorithm) + "/" + to_string(expected.regime));
  }
  const bool ls = trace.info.step == StepPolicy::line_search;
  const double ls_norm = in.lambda_star.norm();

  CheckReport rep;
  rep.per_k.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    KCheck c;
    c.k = r.k;
    c.bound = bound_for(expected, r.k, in, ls);
    const double err = r.f_avg - in.f_star;
    c.obj_ok = std::abs(err) <= c.bound.obj_bound * (1.0 + tol.rel) + tol.abs;
    c.feas_ok = r.feas <= c.bound.feas_bound * (1.0 + tol.rel) + tol.abs;
    c.lower_ok = err >= -ls_norm * r.feas - tol.abs;
    if (!c.ok() && !rep.first_violation) {
      rep.pass = false;
      rep.first_violation = r.k;
      rep.condition = !c.obj_ok ? "objective" : !c.feas_ok ? "feasibility" : "lower_bound";
    }
    rep.per_k.push_back(c);
  }

  const double eps = trace.info.epsilon;
  if (eps > 0.0) {
    if (std::isfinite(in.d_u) && in.d_u > 0.0) {
      rep.predicted_thm31 = detail::try_predict({Algorithm::ama, Regime::smoothed}, eps, in, ls);
      rep.predicted_thm41 = detail::try_predict({Algorithm::fama, Regime::smoothed}, eps, in, ls);
    }
    if (in.mu_g > 0.0) {
      rep.predicted_cor51 = detail::try_predict({Algorithm::ama, Regime::strongly_convex}, eps, in, ls);
      rep.predicted_cor51_accel =
          detail::try_predict({Algorithm::fama, Regime::strongly_convex}, eps, in, ls);
    }
  }
  return rep;
}

/// Definition of an eps-solution: objective residual and feasibility gap both <= eps.
inline bool is_eps_solution(double f, double f_star, double feas, double eps) {
  return std::abs(f - f_star) <= eps && feas <= eps;
}

}  // namespace pdama
