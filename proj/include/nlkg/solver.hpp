#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nlkg/errors.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/grid.hpp"

namespace nlkg {

/// Time-stamped pair (u, u_t) on a grid.
struct FieldState {
  double t = 0.0;
  Field u;
  Field v;
  Grid1D grid;

  static FieldState zero(const Grid1D& grid, double t = 0.0) { return {t, grid.zeros(), grid.zeros(), grid}; }
};

struct StepConfig {
  double dt = 0.01;
  double alpha = 1.0;
  double p = 3.0;
  /// |u| above this is treated like a non-finite value.
  double blowup_cap = 1e8;

  void validate(const Grid1D& grid) const {
    if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
    if (dt > 0.9 * grid.dx()) {
      throw InvalidParameter("time step " + std::to_string(dt) + " violates dt <= 0.9 dx");
    }
    ModelParams::make(alpha, p);
  }
};

namespace detail {

// D2 u - u + f(u) at interior node i.
inline double spatial_rhs(const double* u, std::size_t i, double inv_dx2, double p) {
  return (u[i - 1] + u[i + 1] - 2.0 * u[i]) * inv_dx2 - u[i] + signed_power(u[i], p);
}

}  // namespace detail

/// Three-level central scheme
///   (u+ - 2u + u-)/dt^2 + alpha (u+ - u-)/dt = D2 u - u + f(u),
/// solved explicitly for u+. The first level below t0 comes from a Taylor
/// expansion using the equation for u_tt; Dirichlet endpoints stay at zero.
class Evolution {
 public:
  Evolution(const FieldState& initial, const StepConfig& cfg)
      : grid_(initial.grid), cfg_(cfg), t0_(initial.t) {
    cfg_.validate(grid_);
    if (initial.u.size() != static_cast<Eigen::Index>(grid_.size()) || initial.v.size() != initial.u.size()) {
      throw InvalidParameter("field size does not match grid");
    }
    if (!initial.u.allFinite() || !initial.v.allFinite()) throw BlowUp(initial.t);
    const Eigen::Index n = initial.u.size();
    u_ = initial.u;
    u_[0] = 0.0;
    u_[n - 1] = 0.0;
    Field v = initial.v;
    v[0] = 0.0;
    v[n - 1] = 0.0;
    const double dt = cfg_.dt;
    const double inv_dx2 = 1.0 / (grid_.dx() * grid_.dx());
    u_prev_ = Field::Zero(n);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      const double acc = detail::spatial_rhs(u_.data(), static_cast<std::size_t>(i), inv_dx2, cfg_.p) -
                         2.0 * cfg_.alpha * v[i];
      u_prev_[i] = u_[i] - dt * v[i] + 0.5 * dt * dt * acc;
    }
    scratch_ = Field::Zero(n);
  }

  double time() const noexcept { return t0_ + static_cast<double>(steps_) * cfg_.dt; }
  std::size_t steps() const noexcept { return steps_; }
  const Grid1D& grid() const noexcept { return grid_; }
  const StepConfig& config() const noexcept { return cfg_; }
  const Field& u() const noexcept { return u_; }

  double max_abs_u() const { return u_.cwiseAbs().maxCoeff(); }

  void step() {
    advance_into(scratch_);
    std::swap(u_prev_, u_);
    std::swap(u_, scratch_);
    ++steps_;
  }

  void advance_to(double t_target) {
    const auto target = static_cast<std::size_t>(std::llround((t_target - t0_) / cfg_.dt));
    while (steps_ < target) step();
  }

  /// Current state; v is the centered difference (u+ - u-)/(2 dt), which needs
  /// one look-ahead evaluation of the scheme.
  FieldState state() const {
    Field next(u_.size());
    advance_into(next);
    return {time(), u_, (next - u_prev_) / (2.0 * cfg_.dt), grid_};
  }

 private:
  void advance_into(Field& out) const {
    const std::size_t n = grid_.size();
    const double dt = cfg_.dt;
    const double dt2 = dt * dt;
    const double inv_dx2 = 1.0 / (grid_.dx() * grid_.dx());
    const double damp_old = 1.0 - cfg_.alpha * dt;
    const double inv_damp_new = 1.0 / (1.0 + cfg_.alpha * dt);
    const double* u = u_.data();
    const double* um = u_prev_.data();
    double* up = out.data();
    bool finite = true;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double rhs = detail::spatial_rhs(u, i, inv_dx2, cfg_.p);
      const double val = (2.0 * u[i] - damp_old * um[i] + dt2 * rhs) * inv_damp_new;
      finite &= std::abs(val) <= cfg_.blowup_cap;
      up[i] = val;
    }
    up[0] = 0.0;
    up[n - 1] = 0.0;
    if (!finite) throw BlowUp(time());
  }

  Grid1D grid_;
  StepConfig cfg_;
  double t0_;
  std::size_t steps_ = 0;
  Field u_prev_;
  Field u_;
  Field scratch_;
};

/// One step of the scheme from a state (the previous level is rebuilt by the
/// Taylor start). For longer runs keep an Evolution alive instead.
inline FieldState step(const FieldState& state, const StepConfig& cfg) {
  Evolution evo(state, cfg);
  evo.step();
  return evo.state();
}

/// E = 1/2 int { v^2 + u_x^2 + u^2 - 2 F(u) }, trapezoid weights and forward-difference gradient.
inline double energy(const FieldState& s, double p) {
  const Grid1D& g = s.grid;
  Field potential(s.u.size());
  for (Eigen::Index i = 0; i < s.u.size(); ++i) potential[i] = nonlinear_potential(s.u[i], p);
  return 0.5 * (l2_norm_sq(g, s.v) + gradient_norm_sq(g, s.u) + l2_norm_sq(g, s.u)) - trapezoid(g, potential);
}

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
  double dtu_l2_sq = 0.0;  // ||u_t||^2
};

/// |E(t_last) - E(t_first) + 2 alpha int ||u_t||^2 dt| with trapezoid time quadrature.
inline double dissipation_residual(std::span<const EnergySample> samples, double alpha) {
  if (samples.size() < 2) throw InvalidParameter("dissipation residual needs at least two samples");
  double integral = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    integral += 0.5 * (samples[i].t - samples[i - 1].t) * (samples[i].dtu_l2_sq + samples[i - 1].dtu_l2_sq);
  }
  return std::abs(samples.back().energy - samples.front().energy + 2.0 * alpha * integral);
}

inline EnergySample energy_sample(const FieldState& s, double p) {
  return {s.t, energy(s, p), l2_norm_sq(s.grid, s.v)};
}

}  // namespace nlkg
