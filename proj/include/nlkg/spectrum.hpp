#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "nlkg/errors.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/grid.hpp"
#include "nlkg/tridiagonal.hpp"

namespace nlkg {

/// Symmetric tridiagonal matrix acting on the interior nodes 1..n-2 of a grid
/// (Dirichlet endpoints). Grid functions passed in and out have full length n.
struct SymTridiagonal {
  Grid1D grid;
  Field diag;  // size n-2
  Field off;   // size n-3

  Eigen::Index interior() const { return diag.size(); }

  Field apply(const Field& u) const {
    const Eigen::Index m = interior();
    Field out = Field::Zero(u.size());
    const auto x = u.segment(1, m);
    auto y = out.segment(1, m);
    y = diag.cwiseProduct(x);
    y.head(m - 1) += off.cwiseProduct(x.tail(m - 1));
    y.tail(m - 1) += off.cwiseProduct(x.head(m - 1));
    return out;
  }

  /// Number of eigenvalues strictly below `lambda` (Sturm sequence / LDL^T inertia).
  std::size_t count_below(double lambda) const {
    const Eigen::Index m = interior();
    std::size_t count = 0;
    double pivot = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double coupling = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
      pivot = diag[i] - lambda - (i == 0 ? 0.0 : coupling / pivot);
      if (pivot == 0.0) pivot = -std::numeric_limits<double>::epsilon() * (std::abs(diag[i]) + 1.0);
      if (pivot < 0.0) ++count;
    }
    return count;
  }

  /// Gershgorin interval containing the spectrum.
  std::pair<double, double> bounds() const {
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    const Eigen::Index m = interior();
    for (Eigen::Index i = 0; i < m; ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(off[i - 1]);
      if (i + 1 < m) r += std::abs(off[i]);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }
};

/// Linearized operator -D2 + 1 - p Q^{p-1} with second-order central differences.
inline SymTridiagonal assemble_L(double p, const Grid1D& grid) {
  require_exponent(p);
  const auto m = static_cast<Eigen::Index>(grid.size() - 2);
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  SymTridiagonal op{grid, Field(m), Field::Constant(m - 1, -inv_dx2)};
  for (Eigen::Index k = 0; k < m; ++k) {
    const double q = eval_Q(p, grid.x(static_cast<std::size_t>(k + 1)));
    op.diag[k] = 2.0 * inv_dx2 + 1.0 - p * std::pow(q, p - 1.0);
  }
  return op;
}

struct Eigenpair {
  double value = 0.0;
  Field vector;  // full grid length, unit L2 norm (trapezoid weights)
};

/// k-th smallest eigenvalue (k = 0 is the minimum) by bisection on Sturm counts.
inline double kth_eigenvalue(const SymTridiagonal& op, std::size_t k) {
  if (k >= static_cast<std::size_t>(op.interior())) throw InvalidParameter("eigenvalue index out of range");
  auto [lo, hi] = op.bounds();
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (op.count_below(mid) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline void fix_sign(const Grid1D& grid, Field& v) {
  const std::size_t n = grid.size();
  const auto c0 = static_cast<Eigen::Index>((n - 1) / 2);
  const auto c1 = static_cast<Eigen::Index>(n / 2);
  const double center = v[c0] + v[c1];
  const double scale = v.cwiseAbs().maxCoeff();
  double reference = center;
  if (std::abs(center) <= 1e-8 * scale) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    reference = v[arg];
  }
  if (reference < 0.0) v = -v;
}

}  // namespace detail

/// Eigenpair with index k: eigenvalue by Sturm bisection, eigenvector by
/// inverse iteration. Eigenvectors are normalized in the trapezoid L2 product
/// and signed so that the value at the origin is positive (for functions that
/// vanish there, the largest-magnitude entry is positive).
inline Eigenpair eigenpair(const SymTridiagonal& op, std::size_t k, int max_iter = 8, double tol = 1e-9) {
  const Grid1D& grid = op.grid;
  const double lambda = kth_eigenvalue(op, k);
  const Eigen::Index m = op.interior();

  Tridiagonal shifted{op.off, op.diag.array() - lambda, op.off};
  Field x = Field::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) x[i] += 1e-3 * std::sin(0.37 * static_cast<double>(i));

  const double scale = std::max(std::abs(op.bounds().first), std::abs(op.bounds().second));
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    x = solve_tridiagonal(shifted, x);
    x /= x.norm();
    Field full = Field::Zero(static_cast<Eigen::Index>(grid.size()));
    full.segment(1, m) = x;
    residual = (op.apply(full) - lambda * full).norm();
    if (residual <= tol * scale) break;
  }
  if (!(residual <= tol * scale)) {
    throw NumericalFailure("inverse iteration did not converge (residual " + std::to_string(residual) + ")");
  }
  Eigenpair out;
  out.value = lambda;
  out.vector = Field::Zero(static_cast<Eigen::Index>(grid.size()));
  out.vector.segment(1, m) = x;
  out.vector /= std::sqrt(l2_norm_sq(grid, out.vector));
  detail::fix_sign(grid, out.vector);
  return out;
}

inline Eigenpair smallest_eigenpair(const SymTridiagonal& op) { return eigenpair(op, 0); }

struct RateConstants {
  double nu_plus = 0.0;
  double nu_minus = 0.0;
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;
  double beta = 0.0;
};

inline RateConstants rate_constants(double alpha, double nu0) {
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  if (!(nu0 > 0.0)) throw InvalidParameter("nu0 must be positive");
  const double root = std::sqrt(alpha * alpha + nu0 * nu0);
  return {-alpha + root, -alpha - root, alpha + root, alpha - root, 0.5 / root};
}

/// Unstable eigenpair of the linearized operator with the derived rates.
/// Immutable once built; Y is sampled on its own grid and interpolated elsewhere.
struct SpectralData {
  Grid1D grid;
  double alpha = 0.0;
  double nu0 = 0.0;
  Field Y;
  double nu_plus = 0.0;
  double nu_minus = 0.0;
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;
  double beta = 0.0;

  double nu0_sq() const { return nu0 * nu0; }

  double Y_at(double x) const { return interpolate(grid, Y, x).value; }

  /// Y translated to `center`, sampled on another grid.
  Field Y_on(const Grid1D& target, double center) const {
    return target.sample([&](double x) { return Y_at(x - center); });
  }
};

struct SpectrumConfig {
  double half_width = 40.0;
  std::size_t n = 8192;
};

inline SpectralData compute_spectral_data(const ModelParams& params, const SpectrumConfig& cfg = {}) {
  const Grid1D grid(cfg.half_width, cfg.n);
  const auto op = assemble_L(params.p, grid);
  const auto pair = smallest_eigenpair(op);
  if (!(pair.value < 0.0)) throw NumericalFailure("linearized operator has no negative eigenvalue");
  const double nu0 = std::sqrt(-pair.value);
  const auto rates = rate_constants(params.alpha, nu0);
  return {grid,           params.alpha,    nu0,
          pair.vector,    rates.nu_plus,   rates.nu_minus,
          rates.zeta_plus, rates.zeta_minus, rates.beta};
}

struct CoercivityProbe {
  double quadratic_form = 0.0;  // <L eps, eps>
  double proj_Y = 0.0;          // <eps, Y>
  double proj_Qprime = 0.0;     // <eps, Q'>
};

inline CoercivityProbe coercivity_probe(const SymTridiagonal& op, const Field& eps, const Field& Y,
                                        const Field& q_prime) {
  const Grid1D& g = op.grid;
  return {inner(g, op.apply(eps), eps), inner(g, eps, Y), inner(g, eps, q_prime)};
}

}  // namespace nlkg
