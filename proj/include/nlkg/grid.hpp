#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "nlkg/errors.hpp"

namespace nlkg {

/// Grid function: one value per node.
using Field = Eigen::VectorXd;

/// Uniform, origin-symmetric grid on [-L, L]. Endpoints carry homogeneous
/// Dirichlet data wherever a grid function is evolved or used as an operator domain.
class Grid1D {
 public:
  static constexpr std::size_t kMinNodes = 64;

  Grid1D(double half_width, std::size_t n) : half_width_(half_width), n_(n) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw InvalidParameter("grid half-width must be positive, got " + std::to_string(half_width));
    }
    if (n < kMinNodes) {
      throw InvalidParameter("grid needs at least 64 nodes, got " + std::to_string(n));
    }
    dx_ = 2.0 * half_width / static_cast<double>(n - 1);
    center_ = 0.5 * static_cast<double>(n - 1);
  }

  /// Grid with spacing as close as possible to `dx` (node count rounded).
  static Grid1D with_spacing(double half_width, double dx) {
    if (!(dx > 0.0)) throw InvalidParameter("grid spacing must be positive");
    const auto cells = static_cast<std::size_t>(std::llround(2.0 * half_width / dx));
    return Grid1D(half_width, cells + 1);
  }

  double half_width() const noexcept { return half_width_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }

  /// Node position; x(i) == -x(n-1-i) holds bitwise.
  double x(std::size_t i) const noexcept { return (static_cast<double>(i) - center_) * dx_; }

  std::size_t mirror(std::size_t i) const noexcept { return n_ - 1 - i; }

  Field nodes() const {
    Field out(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) out[static_cast<Eigen::Index>(i)] = x(i);
    return out;
  }

  template <class Fn>
  Field sample(Fn&& fn) const {
    Field out(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) out[static_cast<Eigen::Index>(i)] = fn(x(i));
    return out;
  }

  Field zeros() const { return Field::Zero(static_cast<Eigen::Index>(n_)); }

  /// Fractional node coordinate of position x.
  double coordinate(double pos) const noexcept { return pos / dx_ + center_; }

  bool operator==(const Grid1D& other) const noexcept {
    return n_ == other.n_ && half_width_ == other.half_width_;
  }

 private:
  double half_width_;
  std::size_t n_;
  double dx_ = 0.0;
  double center_ = 0.0;
};

// Quadrature and norms. Trapezoid weights for point values, forward differences
// for gradients; these are the discretizations shared by the solver and the
// modulation diagnostics.

inline double trapezoid(const Grid1D& g, const Field& f) {
  const Eigen::Index n = f.size();
  return g.dx() * (f.sum() - 0.5 * (f[0] + f[n - 1]));
}

inline double inner(const Grid1D& g, const Field& a, const Field& b) {
  const Eigen::Index n = a.size();
  return g.dx() * (a.dot(b) - 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]));
}

inline double l2_norm_sq(const Grid1D& g, const Field& u) { return inner(g, u, u); }

inline double gradient_norm_sq(const Grid1D& g, const Field& u) {
  const Eigen::Index n = u.size();
  const auto diff = u.tail(n - 1) - u.head(n - 1);
  return diff.squaredNorm() / g.dx();
}

inline double h1_norm_sq(const Grid1D& g, const Field& u) {
  return gradient_norm_sq(g, u) + l2_norm_sq(g, u);
}

/// Squared H^1 x L^2 norm of the pair (u, v).
inline double energy_norm_sq(const Grid1D& g, const Field& u, const Field& v) {
  return h1_norm_sq(g, u) + l2_norm_sq(g, v);
}

/// Six-point Lagrange interpolation of node values (and its first two
/// derivatives) at an arbitrary position. Outside the grid the function is 0.
struct InterpolatedValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline InterpolatedValue interpolate(const Grid1D& g, const Field& f, double pos) {
  constexpr int kPoints = 6;
  const double s = g.coordinate(pos);
  const auto n = static_cast<long>(g.size());
  if (!(s >= 0.0) || s > static_cast<double>(n - 1)) return {};
  long first = static_cast<long>(std::floor(s)) - kPoints / 2 + 1;
  first = std::clamp(first, 0L, n - kPoints);
  const double t = s - static_cast<double>(first);

  // Weights for value, d/ds and d^2/ds^2 of the Lagrange basis on nodes 0..5.
  double w0[kPoints];
  double w1[kPoints];
  double w2[kPoints];
  for (int j = 0; j < kPoints; ++j) {
    double denom = 1.0;
    for (int m = 0; m < kPoints; ++m) {
      if (m != j) denom *= static_cast<double>(j - m);
    }
    double prod = 1.0;
    double first_d = 0.0;
    double second_d = 0.0;
    for (int m = 0; m < kPoints; ++m) {
      if (m == j) continue;
      const double factor = t - static_cast<double>(m);
      second_d = second_d * factor + 2.0 * first_d;
      first_d = first_d * factor + prod;
      prod *= factor;
    }
    w0[j] = prod / denom;
    w1[j] = first_d / denom;
    w2[j] = second_d / denom;
  }
  InterpolatedValue out;
  for (int j = 0; j < kPoints; ++j) {
    const double fj = f[first + j];
    out.value += w0[j] * fj;
    out.d1 += w1[j] * fj;
    out.d2 += w2[j] * fj;
  }
  out.d1 /= g.dx();
  out.d2 /= g.dx() * g.dx();
  return out;
}

/// Shift a grid function by an integer number of nodes, padding with zeros.
inline Field shift_nodes(const Field& f, long shift) {
  const long n = f.size();
  Field out = Field::Zero(n);
  for (long i = 0; i < n; ++i) {
    const long src = i - shift;
    if (src >= 0 && src < n) out[i] = f[src];
  }
  return out;
}

/// Exact odd (sign = -1) or even (sign = +1) part with respect to x -> -x.
inline Field symmetrize(const Grid1D& g, const Field& f, int sign) {
  Field out(f.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(g.mirror(i));
    out[a] = sign > 0 ? 0.5 * (f[a] + f[b]) : 0.5 * (f[a] - f[b]);
  }
  return out;
}

}  // namespace nlkg
