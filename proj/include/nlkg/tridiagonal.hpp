#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "nlkg/grid.hpp"

namespace nlkg {

/// General tridiagonal matrix; lower[i] couples row i+1 to column i,
/// upper[i] couples row i to column i+1.
struct Tridiagonal {
  Field lower;
  Field diag;
  Field upper;

  Eigen::Index size() const { return diag.size(); }

  Field apply(const Field& x) const {
    const Eigen::Index n = size();
    Field y = diag.cwiseProduct(x);
    y.head(n - 1) += upper.cwiseProduct(x.tail(n - 1));
    y.tail(n - 1) += lower.cwiseProduct(x.head(n - 1));
    return y;
  }
};

/// Gaussian elimination with partial pivoting (LAPACK gtsv style). Exact zero
/// pivots are replaced by a tiny value so near-singular shifted systems used by
/// inverse iteration still produce a (large) solution.
inline Field solve_tridiagonal(const Tridiagonal& m, const Field& rhs) {
  const Eigen::Index n = m.size();
  Field dl = m.lower;
  Field d = m.diag;
  Field du = m.upper;
  Field du2 = Field::Zero(std::max<Eigen::Index>(n - 2, 0));
  Field b = rhs;
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();

  for (Eigen::Index i = 0; i < n - 1; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double f = dl[i] / d[i];
      d[i + 1] -= f * du[i];
      b[i + 1] -= f * b[i];
      dl[i] = 0.0;
    } else {
      const double f = d[i] / dl[i];
      d[i] = dl[i];
      const double tmp = d[i + 1];
      d[i + 1] = du[i] - f * tmp;
      if (i < n - 2) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du2[i];
      }
      du[i] = tmp;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= f * b[i];
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;

  Field x(n);
  x[n - 1] = b[n - 1] / d[n - 1];
  if (n > 1) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
  for (Eigen::Index i = n - 3; i >= 0; --i) {
    x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
  }
  return x;
}

}  // namespace nlkg
