#pragma once

// Problem template  min g(u) + h(v)  s.t.  A u + B v = c,  u in U,  v in V
// for a diagonal quadratic g and the indicator h of a box V.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "pdama/error.hpp"

namespace pdama {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute per-coordinate slack when testing v in V.
inline constexpr double kMembershipTol = 1e-12;

/// Axis-aligned box with extended-real bounds (IEEE infinities).
struct BoxSet {
  VectorXd lower;
  VectorXd upper;

  BoxSet() = default;
  BoxSet(VectorXd lo, VectorXd up) : lower(std::move(lo)), upper(std::move(up)) {
    if (lower.size() != upper.size()) {
      throw Error(ErrorCode::dimension_mismatch, "box bounds differ in length");
    }
    for (Index i = 0; i < lower.size(); ++i) {
      if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
        throw Error(ErrorCode::bad_bounds, "box coordinate " + std::to_string(i) + " has lower > upper");
      }
    }
  }

  static BoxSet unbounded(Index n) {
    return BoxSet(VectorXd::Constant(n, -kInf), VectorXd::Constant(n, kInf));
  }
  static BoxSet uniform(Index n, double lo, double up) {
    return BoxSet(VectorXd::Constant(n, lo), VectorXd::Constant(n, up));
  }

  Index size() const { return lower.size(); }

  bool is_bounded() const { return lower.allFinite() && upper.allFinite(); }

  bool contains(const VectorXd& x, double tol = kMembershipTol) const {
    for (Index i = 0; i < size(); ++i) {
      if (!(x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)) return false;
    }
    return true;
  }

  VectorXd clip(const VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

  /// Midpoint of each finite interval; half-infinite coordinates sit on their
  /// finite end, free coordinates at zero.
  VectorXd midpoint() const {
    VectorXd m(size());
    for (Index i = 0; i < size(); ++i) {
      const bool lo = std::isfinite(lower[i]);
      const bool up = std::isfinite(upper[i]);
      if (lo && up) {
        m[i] = 0.5 * (lower[i] + upper[i]);
      } else if (lo) {
        m[i] = std::max(lower[i], 0.0);
      } else if (up) {
        m[i] = std::min(upper[i], 0.0);
      } else {
        m[i] = 0.0;
      }
    }
    return m;
  }

  bool operator==(const BoxSet& o) const { return lower == o.lower && upper == o.upper; }
};

/// g(u) = 1/2 ||diag(diag) u - shift||^2.
struct QuadraticObjective {
  VectorXd diag;
  VectorXd shift;

  double value(const VectorXd& u) const {
    return 0.5 * (diag.cwiseProduct(u) - shift).squaredNorm();
  }

  /// mu_g = min_i diag_i^2; zero unless every diagonal entry is positive.
  double strong_convexity() const {
    if (diag.size() == 0) return 0.0;
    return diag.cwiseAbs2().minCoeff();
  }

  bool is_strongly_convex() const { return diag.size() > 0 && (diag.array() > 0.0).all(); }

  bool operator==(const QuadraticObjective& o) const { return diag == o.diag && shift == o.shift; }
};

struct ProblemSpec {
  MatrixXd A;
  MatrixXd B;
  VectorXd c;
  QuadraticObjective g;
  bool h_is_zero_indicator = true;
  BoxSet U;
  BoxSet V;

  Index rows() const { return A.rows(); }
  Index p1() const { return A.cols(); }
  Index p2() const { return B.cols(); }

  bool operator==(const ProblemSpec& o) const {
    return A == o.A && B == o.B && c == o.c && g == o.g &&
           h_is_zero_indicator == o.h_is_zero_indicator && U == o.U && V == o.V;
  }
};

struct PrimalPoint {
  VectorXd u;
  VectorXd v;
};

/// A spec that passed validate(), plus what validation learned about it.
struct ValidatedSpec {
  ProblemSpec spec;
  bool strongly_convex = false;
  bool u_bounded = false;

  bool operator==(const ValidatedSpec& o) const {
    return spec == o.spec && strongly_convex == o.strongly_convex && u_bounded == o.u_bounded;
  }
};

namespace detail {

inline bool btb_is_diagonal(const MatrixXd& B) {
  const MatrixXd btb = B.transpose() * B;
  const double scale = std::max(1.0, btb.diagonal().cwiseAbs().maxCoeff());
  for (Index j = 0; j < btb.cols(); ++j) {
    for (Index i = 0; i < btb.rows(); ++i) {
      if (i != j && std::abs(btb(i, j)) > 1e-12 * scale) return false;
    }
  }
  return true;
}

}  // namespace detail

inline ValidatedSpec validate(const ProblemSpec& spec) {
  const Index n = spec.A.rows();
  if (n == 0 || spec.A.cols() == 0 || spec.B.cols() == 0) {
    throw Error(ErrorCode::dimension_mismatch, "empty A or B");
  }
  if (spec.B.rows() != n) throw Error(ErrorCode::dimension_mismatch, "B rows != A rows");
  if (spec.c.size() != n) throw Error(ErrorCode::dimension_mismatch, "c length != A rows");
  if (spec.g.diag.size() != spec.p1() || spec.g.shift.size() != spec.p1()) {
    throw Error(ErrorCode::dimension_mismatch, "objective length != A cols");
  }
  if (spec.U.size() != spec.p1()) throw Error(ErrorCode::dimension_mismatch, "U length != A cols");
  if (spec.V.size() != spec.p2()) throw Error(ErrorCode::dimension_mismatch, "V length != B cols");
  if (!spec.A.allFinite() || !spec.B.allFinite() || !spec.c.allFinite() ||
      !spec.g.diag.allFinite() || !spec.g.shift.allFinite()) {
    throw Error(ErrorCode::dimension_mismatch, "non-finite data entry");
  }
  if ((spec.g.diag.array() < 0.0).any()) {
    throw Error(ErrorCode::unsupported_objective, "D must be positive semidefinite");
  }
  if (!spec.h_is_zero_indicator) {
    throw Error(ErrorCode::unsupported_objective, "h must be the indicator of V");
  }
  if (!detail::btb_is_diagonal(spec.B)) {
    throw Error(ErrorCode::unsupported_b, "B^T B is not diagonal");
  }
  if (!spec.V.is_bounded()) throw Error(ErrorCode::unbounded_v, "V must be bounded");

  ValidatedSpec out{spec, spec.g.is_strongly_convex(), spec.U.is_bounded()};
  if (!out.strongly_convex && !out.u_bounded) {
    throw Error(ErrorCode::not_smoothable, "g is not strongly convex and U is unbounded");
  }
  return out;
}

/// ||A||_2 by power iteration on A^T A from the normalized all-ones vector.
inline double spectral_norm(const MatrixXd& A, int max_iter = 10000) {
  if (A.rows() == 0 || A.cols() == 0) {
    throw Error(ErrorCode::dimension_mismatch, "spectral_norm of an empty matrix");
  }
  if (A.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  VectorXd x = VectorXd::Ones(A.cols()).normalized();
  VectorXd y(A.cols());
  double rho = -1.0;
  bool restarted = false;
  for (int it = 0; it < max_iter; ++it) {
    y.noalias() = A.transpose() * (A * x);
    const double rho_new = x.dot(y);
    const double ny = y.norm();
    if (ny <= 1e-300 || rho_new <= 0.0) {
      // The start vector fell into the null space; restart on the heaviest column.
      if (restarted) throw Error(ErrorCode::non_convergence, "power iteration collapsed");
      Index j = 0;
      A.colwise().squaredNorm().maxCoeff(&j);
      x.setZero();
      x[j] = 1.0;
      restarted = true;
      rho = -1.0;
      continue;
    }
    if (std::abs(rho_new - rho) <= 1e-14 * rho_new) return std::sqrt(rho_new);
    rho = rho_new;
    x = y / ny;
  }
  throw Error(ErrorCode::non_convergence, "power iteration did not converge");
}

/// D_U = sup_{u in U} 1/2 ||u - center||^2 for a bounded box.
inline double prox_diameter(const BoxSet& U, const VectorXd& center) {
  if (!U.is_bounded()) throw Error(ErrorCode::unbounded_set, "prox-diameter of an unbounded box");
  if (center.size() != U.size()) throw Error(ErrorCode::dimension_mismatch, "center length");
  double sum = 0.0;
  for (Index i = 0; i < U.size(); ++i) {
    const double hi = U.upper[i] - center[i];
    const double lo = U.lower[i] - center[i];
    sum += std::max(hi * hi, lo * lo);
  }
  return 0.5 * sum;
}

/// Slack reformulation of  min 1/2||D u - q||^2  s.t.  a <= A u <= b, ||u||_inf <= r:
/// v = A u gives  A u - v = 0,  U = [-r, r]^p1,  V = [a, b].
inline ProblemSpec reformulate_qp(const VectorXd& D, const VectorXd& q, const MatrixXd& A,
                                  const VectorXd& a, const VectorXd& b, double r) {
  const Index n = A.rows();
  const Index p1 = A.cols();
  if (D.size() != p1 || q.size() != p1 || a.size() != n || b.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "QP data dimensions disagree");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(a[i] < b[i])) {
      throw Error(ErrorCode::bad_bounds, "a[" + std::to_string(i) + "] >= b[" + std::to_string(i) + "]");
    }
  }
  if (!(r > 0.0)) throw Error(ErrorCode::bad_bounds, "r must be positive or +inf");

  ProblemSpec spec;
  spec.A = A;
  spec.B = -MatrixXd::Identity(n, n);
  spec.c = VectorXd::Zero(n);
  spec.g = QuadraticObjective{D, q};
  spec.h_is_zero_indicator = true;
  spec.U = BoxSet::uniform(p1, -r, r);
  spec.V = BoxSet(a, b);
  return spec;
}

/// f(x) = g(u) + h(v); +inf when v leaves V by more than kMembershipTol.
inline double objective(const ProblemSpec& spec, const PrimalPoint& x) {
  if (!spec.V.contains(x.v)) return kInf;
  return spec.g.value(x.u);
}

inline VectorXd constraint_residual(const ProblemSpec& spec, const PrimalPoint& x) {
  return spec.A * x.u + spec.B * x.v - spec.c;
}

inline double feasibility_gap(const ProblemSpec& spec, const PrimalPoint& x) {
  return constraint_residual(spec, x).norm();
}

/// Quadratic prox-function p(u) = 1/2||u - center||^2 (mu_p = 1) and the
/// constants it induces.
struct SmoothingSetup {
  VectorXd center;
  double mu_p = 1.0;
  double gamma = 0.0;
  double d_u = 0.0;
  double norm_A = 0.0;
  double lipschitz_smoothed = 0.0;
  double lipschitz_base = 0.0;
};

/// Builds the smoothing constants; center defaults to the box midpoint and
/// D_U is +inf for an unbounded U.
inline SmoothingSetup make_smoothing(const ProblemSpec& spec, double gamma,
                                     const VectorXd* center = nullptr) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::invalid_config, "gamma must be positive and finite");
  }
  SmoothingSetup s;
  s.center = center ? *center : spec.U.midpoint();
  if (!spec.U.contains(s.center, 0.0)) {
    throw Error(ErrorCode::invalid_config, "prox center must lie in U");
  }
  s.mu_p = 1.0;
  s.gamma = gamma;
  s.d_u = spec.U.is_bounded() ? prox_diameter(spec.U, s.center) : kInf;
  s.norm_A = spectral_norm(spec.A);
  s.lipschitz_base = s.norm_A * s.norm_A / s.mu_p;
  s.lipschitz_smoothed = s.norm_A * s.norm_A / (gamma * s.mu_p);
  return s;
}

}  // namespace pdama
