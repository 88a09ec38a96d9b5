#pragma once

// Oracles of the (smoothed) Lagrange dual
//   d(lambda) = d1(lambda) + d2(lambda) + <c, lambda>
// for the diagonal-quadratic / box-indicator class.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "pdama/core_model.hpp"

namespace pdama {

/// Zero threshold for detecting a multivalued argmax in sharp_v.
inline constexpr double kTieTol = 1e-14;

struct SharpResult {
  VectorXd point;
  std::vector<bool> tie_mask;

  int tie_count() const {
    int n = 0;
    for (bool t : tie_mask) n += t ? 1 : 0;
    return n;
  }
};

struct DualValueBundle {
  double d1 = 0.0;
  double d2 = 0.0;
  double linear = 0.0;
  double total = 0.0;
};

struct DualValues {
  DualValueBundle smoothed;
  DualValueBundle plain;
};

namespace detail {

// argmin_{u in U} g(u) - <s, u> + gamma/2 ||u - center||^2, coordinatewise.
// gamma == 0 requires a positive diagonal.
inline VectorXd u_argmin(const ProblemSpec& spec, double gamma, const VectorXd& center,
                         const VectorXd& s) {
  const auto& d = spec.g.diag;
  const auto& q = spec.g.shift;
  VectorXd u(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    const double num = d[i] * q[i] + s[i] + (gamma > 0.0 ? gamma * center[i] : 0.0);
    const double den = d[i] * d[i] + gamma;
    u[i] = std::clamp(num / den, spec.U.lower[i], spec.U.upper[i]);
  }
  return u;
}

// min_{u in U} g(u) - <s, u>; linear coordinates are minimized at a bound.
inline double d1_from_s(const ProblemSpec& spec, const VectorXd& s) {
  const auto& d = spec.g.diag;
  const auto& q = spec.g.shift;
  double val = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    const double lo = spec.U.lower[i];
    const double up = spec.U.upper[i];
    if (d[i] > 0.0) {
      const double u = std::clamp((d[i] * q[i] + s[i]) / (d[i] * d[i]), lo, up);
      const double r = d[i] * u - q[i];
      val += 0.5 * r * r - s[i] * u;
    } else if (s[i] == 0.0) {
      val += 0.5 * q[i] * q[i];
    } else {
      const double bound = s[i] > 0.0 ? up : lo;
      if (!std::isfinite(bound)) {
        throw Error(ErrorCode::unattained_min, "d1 is -inf along coordinate " + std::to_string(i));
      }
      val += 0.5 * q[i] * q[i] - s[i] * bound;
    }
  }
  return val;
}

// -max_{v in V} <s, v> for the box indicator.
inline double d2_from_s(const BoxSet& V, const VectorXd& s) {
  double val = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > 0.0) {
      val -= s[i] * V.upper[i];
    } else if (s[i] < 0.0) {
      val -= s[i] * V.lower[i];
    }
  }
  return val;
}

inline void require_bounded_v(const ProblemSpec& spec) {
  if (!spec.V.is_bounded()) throw Error(ErrorCode::unbounded_v, "V must be bounded");
}

}  // namespace detail

/// u*_gamma(lambda): the unique minimizer of the smoothed u-subproblem.
inline VectorXd smoothed_u_argmin(const ProblemSpec& spec, const SmoothingSetup& sm,
                                  const VectorXd& lambda) {
  return detail::u_argmin(spec, sm.gamma, sm.center, spec.A.transpose() * lambda);
}

inline VectorXd grad_d1_gamma(const ProblemSpec& spec, const SmoothingSetup& sm,
                              const VectorXd& lambda) {
  return -(spec.A * smoothed_u_argmin(spec, sm, lambda));
}

/// u#(s) for strongly convex g; single-valued, so the tie mask is all false.
inline SharpResult sharp_u(const ProblemSpec& spec, const VectorXd& s) {
  if (!spec.g.is_strongly_convex()) {
    throw Error(ErrorCode::not_strongly_convex, "sharp_u needs a positive diagonal");
  }
  SharpResult r;
  r.point = detail::u_argmin(spec, 0.0, VectorXd(), s);
  r.tie_mask.assign(static_cast<std::size_t>(s.size()), false);
  return r;
}

/// v#(s) for the box indicator. Tied coordinates take the clipped hint, or the
/// interval midpoint without one.
inline SharpResult sharp_v(const ProblemSpec& spec, const VectorXd& s,
                           const VectorXd* tie_hint = nullptr) {
  detail::require_bounded_v(spec);
  const auto& V = spec.V;
  SharpResult r;
  r.point.resize(s.size());
  r.tie_mask.assign(static_cast<std::size_t>(s.size()), false);
  for (Index i = 0; i < s.size(); ++i) {
    if (std::abs(s[i]) <= kTieTol) {
      r.tie_mask[static_cast<std::size_t>(i)] = true;
      r.point[i] = tie_hint ? std::clamp((*tie_hint)[i], V.lower[i], V.upper[i])
                            : 0.5 * (V.lower[i] + V.upper[i]);
    } else {
      r.point[i] = s[i] > 0.0 ? V.upper[i] : V.lower[i];
    }
  }
  return r;
}

/// argmin_{v in V} -<B^T lambda, v> + eta/2 ||c - A u_tilde - B v||^2, exact
/// because B^T B is diagonal.
inline VectorXd v_subproblem(const ProblemSpec& spec, const VectorXd& lambda,
                             const VectorXd& u_tilde, double eta) {
  const VectorXd w = spec.c - spec.A * u_tilde;
  const VectorXd btl = spec.B.transpose() * lambda;
  const VectorXd btw = spec.B.transpose() * w;
  const VectorXd beta = spec.B.colwise().squaredNorm().transpose();
  VectorXd v(spec.p2());
  for (Index i = 0; i < v.size(); ++i) {
    if (beta[i] == 0.0) {
      throw Error(ErrorCode::singular_b, "column " + std::to_string(i) + " of B is zero");
    }
    v[i] = std::clamp((btl[i] + eta * btw[i]) / (eta * beta[i]), spec.V.lower[i], spec.V.upper[i]);
  }
  return v;
}

inline double d1_value(const ProblemSpec& spec, const VectorXd& lambda) {
  return detail::d1_from_s(spec, spec.A.transpose() * lambda);
}

inline double d1_gamma_value(const ProblemSpec& spec, const SmoothingSetup& sm,
                             const VectorXd& lambda) {
  const VectorXd s = spec.A.transpose() * lambda;
  const VectorXd u = detail::u_argmin(spec, sm.gamma, sm.center, s);
  return spec.g.value(u) - s.dot(u) + 0.5 * sm.gamma * (u - sm.center).squaredNorm();
}

inline double d2_value(const ProblemSpec& spec, const VectorXd& lambda) {
  detail::require_bounded_v(spec);
  return detail::d2_from_s(spec.V, spec.B.transpose() * lambda);
}

/// d_gamma(lambda) and d(lambda) with their three-term splits.
inline DualValues dual_values(const ProblemSpec& spec, const SmoothingSetup& sm,
                              const VectorXd& lambda) {
  DualValues out;
  const double d2 = d2_value(spec, lambda);
  const double lin = spec.c.dot(lambda);
  out.smoothed.d1 = d1_gamma_value(spec, sm, lambda);
  out.smoothed.d2 = d2;
  out.smoothed.linear = lin;
  out.smoothed.total = out.smoothed.d1 + d2 + lin;
  out.plain.d1 = d1_value(spec, lambda);
  out.plain.d2 = d2;
  out.plain.linear = lin;
  out.plain.total = out.plain.d1 + d2 + lin;
  return out;
}

/// Unsmoothed dual value d(lambda).
inline double dual_value(const ProblemSpec& spec, const VectorXd& lambda) {
  return d1_value(spec, lambda) + d2_value(spec, lambda) + spec.c.dot(lambda);
}

/// Q_L(lambda; lambda_hat) = d1_gamma(lambda_hat) + <grad, lambda - lambda_hat> - L/2 ||lambda - lambda_hat||^2.
inline double quad_surrogate(const ProblemSpec& spec, const SmoothingSetup& sm,
                             const VectorXd& lambda, const VectorXd& lambda_hat, double L) {
  const VectorXd diff = lambda - lambda_hat;
  return d1_gamma_value(spec, sm, lambda_hat) + grad_d1_gamma(spec, sm, lambda_hat).dot(diff) -
         0.5 * L * diff.squaredNorm();
}

}  // namespace pdama
