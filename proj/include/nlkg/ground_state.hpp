#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "nlkg/errors.hpp"
#include "nlkg/grid.hpp"
#include "nlkg/tridiagonal.hpp"

namespace nlkg {

inline void require_exponent(double p) {
  if (!(p > 2.0) || !std::isfinite(p)) {
    throw InvalidParameter("nonlinearity exponent must satisfy p > 2, got " + std::to_string(p));
  }
}

/// Physical parameters of the damped equation u_tt + 2 alpha u_t - u_xx + u - |u|^{p-1}u = 0.
struct ModelParams {
  double alpha = 1.0;
  double p = 3.0;

  static ModelParams make(double alpha, double p) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw InvalidParameter("damping alpha must be positive, got " + std::to_string(alpha));
    }
    require_exponent(p);
    return {alpha, p};
  }
};

/// |u|^{p-1} u, with a multiplication fast path for integer exponents (the
/// stepper calls this once per node per step).
inline double signed_power(double u, double p) {
  const double a = std::abs(u);
  double mag;
  if (p == 3.0) {
    mag = a * a * a;
  } else if (p == std::floor(p) && p <= 16.0) {
    mag = a;
    for (int k = 1; k < static_cast<int>(p); ++k) mag *= a;
  } else {
    mag = std::pow(a, p);
  }
  return u < 0.0 ? -mag : mag;
}

/// F(u) = |u|^{p+1}/(p+1).
inline double nonlinear_potential(double u, double p) {
  return std::abs(signed_power(u, p + 1.0)) / (p + 1.0);
}

/// c_Q in Q(x) = c_Q e^{-|x|} + O(e^{-2|x|}).
inline double tail_amplitude(double p) {
  require_exponent(p);
  return std::pow(2.0 * p + 2.0, 1.0 / (p - 1.0));
}

namespace detail {

// sech(y)^{2/(p-1)} evaluated without overflow for large |y|.
inline double sech_power(double y, double exponent) {
  const double e = std::exp(-2.0 * std::abs(y));
  return std::exp(exponent * (std::log(2.0) - std::abs(y) - std::log1p(e)));
}

}  // namespace detail

/// Explicit ground state ((p+1) / (2 cosh^2((p-1)x/2)))^{1/(p-1)}.
inline double eval_Q(double p, double x) {
  require_exponent(p);
  const double scale = std::pow(0.5 * (p + 1.0), 1.0 / (p - 1.0));
  return scale * detail::sech_power(0.5 * (p - 1.0) * x, 2.0 / (p - 1.0));
}

/// Q'(x) = -Q(x) tanh((p-1)x/2).
inline double eval_Q_prime(double p, double x) {
  return -eval_Q(p, x) * std::tanh(0.5 * (p - 1.0) * x);
}

/// Q'' = Q - Q^p from the profile equation.
inline double eval_Q_second(double p, double x) {
  const double q = eval_Q(p, x);
  return q - signed_power(q, p);
}

/// max_i |D2 Q - Q + Q^p| over interior nodes, second-order central differences.
inline double residual_Q(double p, const Grid1D& grid) {
  require_exponent(p);
  const Field q = grid.sample([p](double x) { return eval_Q(p, x); });
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < q.size(); ++i) {
    const double lap = (q[i - 1] - 2.0 * q[i] + q[i + 1]) * inv_dx2;
    worst = std::max(worst, std::abs(lap - q[i] + signed_power(q[i], p)));
  }
  return worst;
}

struct QuadratureConfig {
  double half_width = 40.0;
  double dx = 0.005;
};

struct GroundStateConsts {
  double c_Q = 0.0;
  double c_1 = 0.0;    // ||Q'||^2
  double kappa = 0.0;  // (c_Q / c_1) int Q^p e^{-x}
  double E_Q = 0.0;    // E(Q, 0)
};

namespace detail {

struct ConstantIntegrals {
  double qprime_sq = 0.0;
  double qp_exp_minus = 0.0;
  double qp_exp_plus = 0.0;
  double q_p_plus_one = 0.0;
};

inline ConstantIntegrals integrate_constants(double p, double half_width, double dx) {
  const Grid1D grid = Grid1D::with_spacing(half_width, dx);
  ConstantIntegrals out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const double w = (i == 0 || i + 1 == grid.size()) ? 0.5 * grid.dx() : grid.dx();
    const double q = eval_Q(p, x);
    const double qd = eval_Q_prime(p, x);
    const double qp = signed_power(q, p);
    out.qprime_sq += w * qd * qd;
    out.qp_exp_minus += w * qp * std::exp(-x);
    out.qp_exp_plus += w * qp * std::exp(x);
    out.q_p_plus_one += w * qp * q;
  }
  return out;
}

}  // namespace detail

/// Ground-state constants by composite trapezoid quadrature. The result is
/// compared with the same quadrature at twice the spacing; a mismatch above
/// `convergence_tol` (relative) is reported as a numerical failure.
inline GroundStateConsts compute_constants(double p, const QuadratureConfig& quad = {},
                                           double convergence_tol = 1e-9) {
  require_exponent(p);
  if (quad.half_width < 30.0) {
    throw InvalidParameter("quadrature half-width must be at least 30");
  }
  if (!(quad.dx > 0.0) || quad.dx > 0.01) {
    throw InvalidParameter("quadrature spacing must lie in (0, 0.01]");
  }
  const auto fine = detail::integrate_constants(p, quad.half_width, quad.dx);
  const auto coarse = detail::integrate_constants(p, quad.half_width, 2.0 * quad.dx);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  if (rel(fine.qprime_sq, coarse.qprime_sq) > convergence_tol ||
      rel(fine.qp_exp_minus, coarse.qp_exp_minus) > convergence_tol ||
      rel(fine.q_p_plus_one, coarse.q_p_plus_one) > convergence_tol) {
    throw NumericalFailure("ground-state quadrature did not converge under refinement");
  }
  GroundStateConsts c;
  c.c_Q = tail_amplitude(p);
  c.c_1 = fine.qprime_sq;
  c.kappa = c.c_Q / c.c_1 * fine.qp_exp_minus;
  c.E_Q = (0.5 - 1.0 / (p + 1.0)) * fine.q_p_plus_one;
  return c;
}

inline GroundStateConsts compute_constants(const ModelParams& params, const QuadratureConfig& quad = {}) {
  return compute_constants(params.p, quad);
}

/// kappa with the weight e^{+x} in place of e^{-x}; equal to kappa by evenness of Q.
inline double kappa_mirrored(double p, const QuadratureConfig& quad = {}) {
  const auto in = detail::integrate_constants(p, quad.half_width, quad.dx);
  return tail_amplitude(p) / in.qprime_sq * in.qp_exp_plus;
}

/// Even solution of D2 q - q + |q|^{p-1}q = 0 with q = 0 at both endpoints,
/// obtained by Newton's method from the sampled explicit Q. The even
/// reflection is folded into the unknowns, which removes the (odd) translation
/// mode from the Jacobian.
inline Field discrete_ground_state(double p, const Grid1D& grid, double tol = 1e-11, int max_iter = 40) {
  require_exponent(p);
  const std::size_t n = grid.size();
  const std::size_t half = (n + 1) / 2;  // unknowns 0..half-1, node 0 is the boundary
  const bool has_center = (n % 2) == 1;
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());

  Field q = grid.sample([p](double x) { return eval_Q(p, x); });
  q[0] = 0.0;
  q[static_cast<Eigen::Index>(n - 1)] = 0.0;

  const auto m = static_cast<Eigen::Index>(half - 1);  // interior unknowns 1..half-1
  for (int iter = 0; iter < max_iter; ++iter) {
    Tridiagonal jac{Field::Constant(m - 1, inv_dx2), Field(m), Field::Constant(m - 1, inv_dx2)};
    Field residual(m);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index i = k + 1;
      const double left = q[i - 1];
      const double right = q[i + 1];
      const double qi = q[i];
      residual[k] = (left - 2.0 * qi + right) * inv_dx2 - qi + signed_power(qi, p);
      jac.diag[k] = -2.0 * inv_dx2 - 1.0 + p * std::abs(signed_power(qi, p - 1.0));
      worst = std::max(worst, std::abs(residual[k]));
    }
    // Fold: the neighbour beyond the last unknown is its mirror image.
    if (has_center) {
      if (m >= 2) jac.lower[m - 2] = 2.0 * inv_dx2;
    } else {
      jac.diag[m - 1] += inv_dx2;
    }
    if (worst <= tol) {
      return q;
    }
    const Field step = solve_tridiagonal(jac, -residual);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index i = k + 1;
      q[i] += step[k];
      q[static_cast<Eigen::Index>(grid.mirror(static_cast<std::size_t>(i)))] = q[i];
    }
  }
  throw NumericalFailure("discrete ground state: Newton did not converge");
}

/// Soliton template used by modulation and initial data: the explicit Q,
/// optionally corrected to the discrete ground state of a given grid (the
/// correction is interpolated, so translates off the grid are available).
class Profile {
 public:
  static Profile analytic(double p) {
    require_exponent(p);
    return Profile(p, std::nullopt, Field());
  }

  static Profile discrete(double p, const Grid1D& grid) {
    const Field q = discrete_ground_state(p, grid);
    Field correction = q - grid.sample([p](double x) { return eval_Q(p, x); });
    return Profile(p, grid, std::move(correction));
  }

  double p() const noexcept { return p_; }
  bool is_discrete() const noexcept { return grid_.has_value(); }

  double value(double x) const {
    double v = eval_Q(p_, x);
    if (grid_) v += interpolate(*grid_, correction_, x).value;
    return v;
  }

  /// Value and first two derivatives at x.
  InterpolatedValue eval(double x) const {
    const double q = eval_Q(p_, x);
    InterpolatedValue out{q, -q * std::tanh(0.5 * (p_ - 1.0) * x), q - signed_power(q, p_)};
    if (grid_) {
      const auto c = interpolate(*grid_, correction_, x);
      out.value += c.value;
      out.d1 += c.d1;
      out.d2 += c.d2;
    }
    return out;
  }

  double peak() const { return value(0.0); }

 private:
  Profile(double p, std::optional<Grid1D> grid, Field correction)
      : p_(p), grid_(std::move(grid)), correction_(std::move(correction)) {}

  double p_;
  std::optional<Grid1D> grid_;
  Field correction_;
};

}  // namespace nlkg
