#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "nlkg/errors.hpp"
#include "nlkg/fit.hpp"

namespace nlkg {

/// gamma_k = k (K - k) / 2 for k = 1..K-1.
inline std::vector<double> gamma_coefficients(int K) {
  if (K < 2) throw InvalidParameter("need K >= 2, got " + std::to_string(K));
  std::vector<double> g(static_cast<std::size_t>(K - 1));
  for (int k = 1; k < K; ++k) g[static_cast<std::size_t>(k - 1)] = 0.5 * k * (K - k);
  return g;
}

struct AsymptoticProfile {
  int K = 2;
  std::vector<double> tau;
  std::vector<double> gamma;
  double alpha = 1.0;
  double kappa = 1.0;
};

/// tau with sum zero and e^{-(tau_{k+1} - tau_k)} = (2 alpha / kappa) gamma_k.
inline AsymptoticProfile tau_profile(int K, double alpha, double kappa) {
  if (!(alpha > 0.0) || !(kappa > 0.0)) throw InvalidParameter("alpha and kappa must be positive");
  AsymptoticProfile prof{K, std::vector<double>(static_cast<std::size_t>(K), 0.0), gamma_coefficients(K), alpha,
                         kappa};
  for (int k = 1; k < K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    prof.tau[i] = prof.tau[i - 1] - std::log(2.0 * alpha / kappa * prof.gamma[i - 1]);
  }
  const double mean = std::accumulate(prof.tau.begin(), prof.tau.end(), 0.0) / K;
  for (double& t : prof.tau) t -= mean;
  return prof;
}

/// ybar_k(t) = (k - (K+1)/2) log t + tau_k.
inline std::vector<double> exact_profile_y(double t, const AsymptoticProfile& prof) {
  if (!(t > 0.0)) throw InvalidParameter("profile time must be positive");
  std::vector<double> y(prof.tau.size());
  const double lt = std::log(t);
  for (int k = 1; k <= prof.K; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    y[i] = (k - 0.5 * (prof.K + 1)) * lt + prof.tau[i];
  }
  return y;
}

/// Right-hand side of the nearest-neighbour center system.
inline void centers_rhs(std::span<const double> y, double alpha, double kappa, std::span<double> out) {
  const std::size_t K = y.size();
  const double c = kappa / (2.0 * alpha);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double pull = c * std::exp(-(y[k + 1] - y[k]));
    out[k] -= pull;
    out[k + 1] += pull;
  }
}

inline std::vector<double> centers_rhs(std::span<const double> y, double alpha, double kappa) {
  std::vector<double> out(y.size());
  centers_rhs(y, alpha, kappa, out);
  return out;
}

/// max_k |d/dt ybar_k - rhs_k(ybar)| at time t.
inline double profile_residual(double t, const AsymptoticProfile& prof) {
  const auto y = exact_profile_y(t, prof);
  const auto f = centers_rhs(y, prof.alpha, prof.kappa);
  double worst = 0.0;
  for (int k = 1; k <= prof.K; ++k) {
    const double dy = (k - 0.5 * (prof.K + 1)) / t;
    worst = std::max(worst, std::abs(dy - f[static_cast<std::size_t>(k - 1)]));
  }
  return worst;
}

struct OdeTolerance {
  double rel = 1e-10;
  double abs = 1e-12;
};

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
  double mean_drift = 0.0;            // max |sum y(t) - sum y(t0)|
  std::size_t ordering_violations = 0;  // samples where y stopped being increasing
};

/// `count` sample times spaced evenly in log t over [t0, t1], endpoints included.
inline std::vector<double> log_spaced(double t0, double t1, std::size_t count) {
  if (!(t0 > 0.0) || !(t1 > t0) || count < 2) throw InvalidParameter("log_spaced: need 0 < t0 < t1, count >= 2");
  std::vector<double> out(count);
  const double a = std::log(t0);
  const double b = std::log(t1);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = t0;
  out.back() = t1;
  return out;
}

namespace detail {

using OdeVec = std::vector<double>;

// Integrates dx/ds = rhs(s, x) in s = log t with dense-output Dormand-Prince,
// recording x at the requested times.
template <class Rhs>
std::vector<OdeVec> integrate_log_time(Rhs rhs, OdeVec x, std::span<const double> times, const OdeTolerance& tol) {
  namespace odeint = boost::numeric::odeint;
  std::vector<double> s(times.size());
  std::transform(times.begin(), times.end(), s.begin(), [](double t) { return std::log(t); });
  std::vector<OdeVec> out;
  out.reserve(times.size());
  auto stepper = odeint::make_dense_output(tol.abs, tol.rel, odeint::runge_kutta_dopri5<OdeVec>());
  const double ds0 = std::max(1e-6, 1e-3 * (s.back() - s.front()));
  try {
    odeint::integrate_times(
        stepper, [&](const OdeVec& xs, OdeVec& dx, double si) { rhs(si, xs, dx); }, x, s.begin(), s.end(), ds0,
        [&](const OdeVec& xs, double) {
          for (double v : xs) {
            if (!std::isfinite(v)) throw StiffnessError("ODE state became non-finite");
          }
          out.push_back(xs);
        },
        odeint::max_step_checker(100000));
  } catch (const odeint::odeint_error& e) {
    throw StiffnessError(std::string("ODE step-size control failed: ") + e.what());
  }
  return out;
}

}  // namespace detail

/// Center system from (t0, y0) sampled at `times` (first entry must be t0).
inline OdeTrajectory integrate_centers(std::span<const double> y0, std::span<const double> times, double alpha,
                                       double kappa, const OdeTolerance& tol = {}) {
  if (y0.size() < 2) throw InvalidParameter("integrate_centers: need K >= 2");
  if (times.size() < 2 || !(times.front() > 0.0)) throw InvalidParameter("integrate_centers: bad sample times");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidParameter("integrate_centers: sample times must increase");
  }
  for (std::size_t k = 0; k + 1 < y0.size(); ++k) {
    if (!(y0[k + 1] > y0[k])) throw InvalidParameter("integrate_centers: initial centers must increase");
  }
  if (!(alpha > 0.0) || !(kappa > 0.0)) throw InvalidParameter("alpha and kappa must be positive");

  auto rhs = [alpha, kappa](double s, const detail::OdeVec& y, detail::OdeVec& dy) {
    centers_rhs(y, alpha, kappa, dy);
    const double t = std::exp(s);
    for (double& d : dy) d *= t;
  };
  OdeTrajectory traj;
  traj.t.assign(times.begin(), times.end());
  traj.y = detail::integrate_log_time(rhs, detail::OdeVec(y0.begin(), y0.end()), times, tol);
  const double sum0 = std::accumulate(y0.begin(), y0.end(), 0.0);
  for (const auto& y : traj.y) {
    traj.mean_drift = std::max(traj.mean_drift, std::abs(std::accumulate(y.begin(), y.end(), 0.0) - sum0));
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
      if (!(y[k + 1] > y[k])) {
        ++traj.ordering_violations;
        break;
      }
    }
  }
  return traj;
}

/// Phi(varpi) for the rescaled centers varpi_k = y_k - ybar_k.
inline std::vector<double> phi(std::span<const double> w, std::span<const double> gamma) {
  const std::size_t K = w.size();
  if (K < 2 || gamma.size() + 1 != K) throw InvalidParameter("phi: need K >= 2 and K-1 coefficients");
  std::vector<double> out(K, 0.0);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double link = gamma[k] * (std::exp(-(w[k + 1] - w[k])) - 1.0);
    out[k] -= link;
    out[k + 1] += link;
  }
  return out;
}

/// Jacobian of Phi at the origin (tridiagonal, symmetric, zero row sums).
inline Eigen::MatrixXd dphi0(int K) {
  const auto gamma = gamma_coefficients(K);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k + 1 < K; ++k) {
    const double g = gamma[static_cast<std::size_t>(k)];
    m(k, k) -= g;
    m(k + 1, k + 1) -= g;
    m(k, k + 1) += g;
    m(k + 1, k) += g;
  }
  return m;
}

struct XiRun {
  std::vector<double> t;
  std::vector<std::vector<double>> varpi;
  std::vector<double> scaled_deviation;  // ||varpi(t) - (varpi(t0), e1) e1|| * t / t0
  double sup_scaled_deviation = 0.0;
  double mean_drift = 0.0;
  /// Slope of log ||varpi - mean|| against log t (the linear decay rate is its negative).
  double fitted_rate = 0.0;
  /// Log-log slope of the scaled deviation over the second half of the samples.
  double late_trend = 0.0;
};

/// d varpi / dt = Phi(varpi) / t from t0 to t1, sampled at `samples` log-spaced times.
inline XiRun xi_convergence_run(std::span<const double> xi0, double t0, double t1, std::size_t samples = 200,
                                const OdeTolerance& tol = {}) {
  const int K = static_cast<int>(xi0.size());
  const auto gamma = gamma_coefficients(K);
  double norm0 = 0.0;
  for (double v : xi0) norm0 += v * v;
  if (std::sqrt(norm0) > 1.0) throw InvalidParameter("xi_convergence_run: need ||xi0|| <= 1");

  const auto times = log_spaced(t0, t1, samples);
  auto rhs = [&gamma](double, const detail::OdeVec& w, detail::OdeVec& dw) { dw = phi(w, gamma); };
  XiRun run;
  run.t = times;
  run.varpi = detail::integrate_log_time(rhs, detail::OdeVec(xi0.begin(), xi0.end()), times, tol);

  const double mean0 = std::accumulate(xi0.begin(), xi0.end(), 0.0) / K;
  std::vector<double> log_t, log_dev, log_t_late, log_scaled_late;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& w = run.varpi[i];
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / K;
    run.mean_drift = std::max(run.mean_drift, std::abs(mean - mean0) * K);
    double dev = 0.0;
    for (double v : w) dev += (v - mean0) * (v - mean0);
    dev = std::sqrt(dev);
    const double scaled = dev * times[i] / t0;
    run.scaled_deviation.push_back(scaled);
    run.sup_scaled_deviation = std::max(run.sup_scaled_deviation, scaled);
    if (dev > 1e-13) {
      log_t.push_back(std::log(times[i]));
      log_dev.push_back(std::log(dev));
      if (2 * i >= times.size()) {
        log_t_late.push_back(std::log(times[i]));
        log_scaled_late.push_back(std::log(scaled));
      }
    }
  }
  if (log_t.size() >= 2) run.fitted_rate = linear_fit(log_t, log_dev).slope;
  if (log_t_late.size() >= 2) run.late_trend = linear_fit(log_t_late, log_scaled_late).slope;
  return run;
}

}  // namespace nlkg
