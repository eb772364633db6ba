#pragma once

#include <cmath>
#include <span>

#include <Eigen/Dense>

#include "nlkg/errors.hpp"

namespace nlkg {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidParameter("linear_fit: size mismatch");
  if (x.size() < 2) throw FitError("linear_fit: need at least two points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = x[static_cast<std::size_t>(i)];
    A(i, 1) = 1.0;
    b[i] = y[static_cast<std::size_t>(i)];
  }
  if (!A.allFinite() || !b.allFinite()) throw FitError("linear_fit: non-finite data");
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (A * c - b).squaredNorm();
  LinearFit out{c[0], c[1], ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0, x.size()};
  if (!std::isfinite(out.slope)) throw FitError("linear_fit: degenerate abscissae");
  return out;
}

}  // namespace nlkg
