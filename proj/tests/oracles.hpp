#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical routines.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Seeded generators for property tests.
struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}
  double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  VectorXd vec(Index n, double lo = -1.0, double hi = 1.0) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = uni(lo, hi);
    return v;
  }
  VectorXd normal_vec(Index n, double scale = 1.0) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }
  MatrixXd mat(Index r, Index c) {
    MatrixXd m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }
};

// Largest singular value by cyclic Jacobi on the symmetric matrix A^T A.
inline double jacobi_spectral_norm(const MatrixXd& A) {
  MatrixXd S = A.transpose() * A;
  const Index n = S.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += S(p, q) * S(p, q);
    if (off < 1e-30 * std::max(1.0, S.squaredNorm())) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (S(p, q) == 0.0) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (Index k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
    }
  }
  double mx = 0.0;
  for (Index i = 0; i < n; ++i) mx = std::max(mx, S(i, i));
  return std::sqrt(mx);
}

// max over the 2^p vertices of 1/2||u - center||^2.
inline double vertex_prox_max(const VectorXd& lo, const VectorXd& up, const VectorXd& center) {
  const Index p = lo.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    double v = 0.0;
    for (Index i = 0; i < p; ++i) {
      const double x = (mask >> i) & 1 ? up[i] : lo[i];
      v += 0.5 * (x - center[i]) * (x - center[i]);
    }
    best = std::max(best, v);
  }
  return best;
}

// argmin of a 1-D function on a uniform grid over [lo, hi].
inline double grid_argmin_1d(const std::function<double(double)>& f, double lo, double hi, double h) {
  double best_x = lo, best = f(lo);
  const auto steps = static_cast<long>(std::floor((hi - lo) / h));
  for (long i = 1; i <= steps; ++i) {
    const double x = lo + static_cast<double>(i) * h;
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

// argmin of a 2-D function on a uniform grid over a box.
inline VectorXd grid_argmin_2d(const std::function<double(const VectorXd&)>& f, const VectorXd& lo,
                               const VectorXd& up, double h) {
  VectorXd x(2), best_x = lo;
  double best = std::numeric_limits<double>::infinity();
  const auto n0 = static_cast<long>(std::floor((up[0] - lo[0]) / h));
  const auto n1 = static_cast<long>(std::floor((up[1] - lo[1]) / h));
  for (long i = 0; i <= n0; ++i) {
    x[0] = lo[0] + static_cast<double>(i) * h;
    for (long j = 0; j <= n1; ++j) {
      x[1] = lo[1] + static_cast<double>(j) * h;
      const double v = f(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
  }
  return best_x;
}

inline VectorXd central_diff(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// prox of eta * sigma_V(B^T .) evaluated at y for diagonal B: the dual step
// written as one forward-backward move. Per coordinate the function is
// piecewise linear with right slope sR and left slope sL.
inline VectorXd box_support_prox(const VectorXd& y, const VectorXd& bdiag, const VectorXd& lo,
                                 const VectorXd& up, double eta) {
  VectorXd out(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const double b = bdiag[i];
    const double sR = b > 0 ? eta * b * up[i] : eta * b * lo[i];
    const double sL = b > 0 ? eta * b * lo[i] : eta * b * up[i];
    if (y[i] > sR) {
      out[i] = y[i] - sR;
    } else if (y[i] < sL) {
      out[i] = y[i] - sL;
    } else {
      out[i] = 0.0;
    }
  }
  return out;
}

// min over u on a grid of 1/2||D u - q||^2 subject to a <= A u <= b and
// |u_i| <= R, for p1 <= 2.
inline double grid_qp_min(const VectorXd& D, const VectorXd& q, const MatrixXd& A, const VectorXd& a,
                          const VectorXd& b, double R, double h) {
  const Index p = D.size();
  // plain loops: this runs millions of times per instance
  auto f = [&](const double* u) {
    for (Index i = 0; i < A.rows(); ++i) {
      double s = 0.0;
      for (Index j = 0; j < p; ++j) s += A(i, j) * u[j];
      if (s < a[i] || s > b[i]) return std::numeric_limits<double>::infinity();
    }
    double r = 0.0;
    for (Index j = 0; j < p; ++j) r += (D[j] * u[j] - q[j]) * (D[j] * u[j] - q[j]);
    return 0.5 * r;
  };
  double best = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<long>(std::floor(2.0 * R / h));
  double u[2] = {0.0, 0.0};
  if (p == 1) {
    for (long i = 0; i <= steps; ++i) {
      u[0] = -R + static_cast<double>(i) * h;
      best = std::min(best, f(u));
    }
  } else {
    for (long i = 0; i <= steps; ++i) {
      u[0] = -R + static_cast<double>(i) * h;
      for (long j = 0; j <= steps; ++j) {
        u[1] = -R + static_cast<double>(j) * h;
        best = std::min(best, f(u));
      }
    }
  }
  return best;
}

}  // namespace oracle
