#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nlkg/errors.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/grid.hpp"
#include "nlkg/solver.hpp"
#include "nlkg/spectrum.hpp"

namespace nlkg {

/// u = sum_k sigma_k Q(. - z_k) + eps,  u_t = -sum_k ell_k d_x Q_k + eta,
/// with eps, eta orthogonal to every d_x Q_k.
struct Decomposition {
  std::vector<int> sigma;
  std::vector<double> z;
  std::vector<double> ell;
  Field eps;
  Field eta;
  Field R;  // sum of the modulated solitons
  std::vector<double> a_plus;
  std::vector<double> a_minus;
  double orthogonality_residual = 0.0;
  int newton_iterations = 0;

  std::size_t K() const noexcept { return sigma.size(); }
};

struct Diagnostics {
  double N = 0.0;
  double F_plus = 0.0;
  double F_minus = 0.0;
  double b = 0.0;
  double calE = 0.0;
  double calB = 0.0;
  double eps_energy_norm = 0.0;
};

struct DecomposeOptions {
  int max_newton = 50;
  double orthogonality_tol = 1e-10;
  double min_spacing = 2.0;
  /// Largest ||eps||_{H^1 x L^2} accepted as "inside the tube".
  double tube_radius = 0.3;
};

namespace detail {

struct Translates {
  std::vector<Field> q;   // sigma_k T(x - z_k)
  std::vector<Field> dq;  // sigma_k T'(x - z_k)
  std::vector<Field> d2q;
};

inline Translates translates(const Grid1D& g, const Profile& profile, std::span<const int> sigma,
                             std::span<const double> z) {
  Translates t;
  const std::size_t K = sigma.size();
  t.q.assign(K, g.zeros());
  t.dq.assign(K, g.zeros());
  t.d2q.assign(K, g.zeros());
  for (std::size_t k = 0; k < K; ++k) {
    const double s = static_cast<double>(sigma[k]);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto v = profile.eval(g.x(i) - z[k]);
      const auto idx = static_cast<Eigen::Index>(i);
      t.q[k][idx] = s * v.value;
      t.dq[k][idx] = s * v.d1;
      t.d2q[k][idx] = s * v.d2;
    }
  }
  return t;
}

inline void check_spacing(std::span<const double> z, double min_spacing) {
  for (std::size_t k = 0; k + 1 < z.size(); ++k) {
    if (!(z[k + 1] - z[k] >= min_spacing)) {
      throw IllConditioned("soliton centers too close: z[" + std::to_string(k + 1) + "] - z[" +
                           std::to_string(k) + "] = " + std::to_string(z[k + 1] - z[k]));
    }
  }
}

}  // namespace detail

/// Sum of modulated solitons and the matching velocity field -sum ell_k d_x Q_k.
inline FieldState soliton_sum(const Grid1D& g, const Profile& profile, std::span<const int> sigma,
                              std::span<const double> z, std::span<const double> ell = {}, double t = 0.0) {
  const auto tr = detail::translates(g, profile, sigma, z);
  FieldState s = FieldState::zero(g, t);
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    s.u += tr.q[k];
    if (!ell.empty()) s.v -= ell[k] * tr.dq[k];
  }
  return s;
}

/// Newton iteration for the centers (analytic Jacobian with cross terms and
/// step halving), then a linear solve for the velocities, then the residual
/// and its unstable/stable amplitudes.
inline Decomposition decompose(const FieldState& state, const Profile& profile, const SpectralData& spectral,
                               std::span<const int> sigma, std::span<const double> z_guess,
                               const DecomposeOptions& opts = {}) {
  const std::size_t K = sigma.size();
  if (K == 0 || z_guess.size() != K) throw InvalidParameter("decompose: need K >= 1 signs and guesses");
  for (int s : sigma) {
    if (s != 1 && s != -1) throw InvalidParameter("decompose: signs must be +1 or -1");
  }
  const Grid1D& g = state.grid;
  detail::check_spacing(z_guess, opts.min_spacing);

  std::vector<double> z(z_guess.begin(), z_guess.end());
  const auto kK = static_cast<Eigen::Index>(K);

  auto evaluate = [&](const std::vector<double>& centers, detail::Translates& tr, Field& eps, Eigen::VectorXd& G) {
    tr = detail::translates(g, profile, sigma, centers);
    eps = state.u;
    for (std::size_t k = 0; k < K; ++k) eps -= tr.q[k];
    G.resize(kK);
    for (std::size_t k = 0; k < K; ++k) G[static_cast<Eigen::Index>(k)] = inner(g, eps, tr.dq[k]);
  };

  detail::Translates tr;
  Field eps;
  Eigen::VectorXd G;
  evaluate(z, tr, eps, G);
  int iterations = 0;
  bool converged = false;
  for (; iterations < opts.max_newton; ++iterations) {
    const double gnorm = G.cwiseAbs().maxCoeff();
    if (gnorm <= 1e-13) {
      converged = true;
      break;
    }
    Eigen::MatrixXd J(kK, kK);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t j = 0; j < K; ++j) {
        double entry = inner(g, tr.dq[j], tr.dq[k]);
        if (j == k) entry -= inner(g, eps, tr.d2q[k]);
        J(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = entry;
      }
    }
    const Eigen::VectorXd delta = J.partialPivLu().solve(-G);
    if (!delta.allFinite()) break;

    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving) {
      std::vector<double> trial = z;
      for (std::size_t k = 0; k < K; ++k) trial[k] += lambda * delta[static_cast<Eigen::Index>(k)];
      detail::Translates tr_trial;
      Field eps_trial;
      Eigen::VectorXd G_trial;
      evaluate(trial, tr_trial, eps_trial, G_trial);
      if (G_trial.norm() < G.norm() || delta.cwiseAbs().maxCoeff() * lambda < 1e-15) {
        z = std::move(trial);
        tr = std::move(tr_trial);
        eps = std::move(eps_trial);
        G = std::move(G_trial);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      converged = G.cwiseAbs().maxCoeff() <= opts.orthogonality_tol;
      break;
    }
  }
  if (!converged && G.cwiseAbs().maxCoeff() <= opts.orthogonality_tol) converged = true;
  if (!converged) {
    throw OutOfTube("modulation Newton iteration did not converge in " + std::to_string(opts.max_newton) +
                    " iterations (residual " + std::to_string(G.cwiseAbs().maxCoeff()) + ")");
  }
  detail::check_spacing(z, opts.min_spacing);

  Decomposition dec;
  dec.sigma.assign(sigma.begin(), sigma.end());
  dec.z = z;
  dec.newton_iterations = iterations;

  Eigen::MatrixXd gram(kK, kK);
  Eigen::VectorXd rhs(kK);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < K; ++j) {
      gram(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = inner(g, tr.dq[j], tr.dq[k]);
    }
    rhs[static_cast<Eigen::Index>(k)] = -inner(g, state.v, tr.dq[k]);
  }
  const Eigen::VectorXd ell = gram.ldlt().solve(rhs);
  dec.ell.assign(ell.data(), ell.data() + kK);

  dec.eps = std::move(eps);
  dec.eta = state.v;
  dec.R = g.zeros();
  for (std::size_t k = 0; k < K; ++k) {
    dec.eta += dec.ell[k] * tr.dq[k];
    dec.R += tr.q[k];
  }

  double residual = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    residual = std::max(residual, std::abs(inner(g, dec.eps, tr.dq[k])));
    residual = std::max(residual, std::abs(inner(g, dec.eta, tr.dq[k])));
  }
  dec.orthogonality_residual = residual;

  const double eps_norm = std::sqrt(energy_norm_sq(g, dec.eps, dec.eta));
  if (!(eps_norm <= opts.tube_radius)) {
    throw OutOfTube("residual energy norm " + std::to_string(eps_norm) + " exceeds tube radius");
  }

  dec.a_plus.resize(K);
  dec.a_minus.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Field Yk = static_cast<double>(sigma[k]) * spectral.Y_on(g, z[k]);
    const double pe = inner(g, dec.eps, Yk);
    const double pn = inner(g, dec.eta, Yk);
    dec.a_plus[k] = spectral.zeta_plus * pe + pn;
    dec.a_minus[k] = spectral.zeta_minus * pe + pn;
  }
  return dec;
}

/// Default mu = 0.9 min(1, alpha, |nu^-|).
inline double default_mu(double alpha, double nu_minus) {
  return 0.9 * std::min({1.0, alpha, std::abs(nu_minus)});
}

/// Interaction sums over neighbouring pairs, using y_k = z_k + ell_k/(2 alpha).
struct InteractionSums {
  double F_plus = 0.0;
  double F_minus = 0.0;
};

inline InteractionSums interaction_sums(const Decomposition& dec, double alpha) {
  InteractionSums out;
  for (std::size_t k = 0; k + 1 < dec.K(); ++k) {
    const double yk = dec.z[k] + dec.ell[k] / (2.0 * alpha);
    const double yk1 = dec.z[k + 1] + dec.ell[k + 1] / (2.0 * alpha);
    const double term = std::exp(-(yk1 - yk));
    if (dec.sigma[k] == dec.sigma[k + 1]) {
      out.F_plus += term;
    } else {
      out.F_minus += term;
    }
  }
  return out;
}

inline Diagnostics diagnostics(const Decomposition& dec, const Grid1D& g, const ModelParams& params,
                               const SpectralData& spectral, double mu) {
  const double mu_max = std::min({1.0, params.alpha, std::abs(spectral.nu_minus)});
  if (!(mu > 0.0) || mu > mu_max) {
    throw InvalidParameter("mu must lie in (0, min(1, alpha, |nu^-|)] = (0, " + std::to_string(mu_max) + "]");
  }
  Diagnostics d;
  const double eps_sq = energy_norm_sq(g, dec.eps, dec.eta);
  double ell_sq = 0.0;
  for (double l : dec.ell) ell_sq += l * l;
  d.eps_energy_norm = std::sqrt(eps_sq);
  d.N = std::sqrt(eps_sq + ell_sq);

  const auto sums = interaction_sums(dec, params.alpha);
  d.F_plus = sums.F_plus;
  d.F_minus = sums.F_minus;

  double aminus_sq = 0.0;
  for (std::size_t k = 0; k < dec.K(); ++k) {
    d.b += dec.a_plus[k] * dec.a_plus[k];
    aminus_sq += dec.a_minus[k] * dec.a_minus[k];
  }
  d.calB = ell_sq + aminus_sq / (2.0 * mu);

  const double rho = 2.0 * params.alpha - mu;
  const double p = params.p;
  Field nonlinear(dec.eps.size());
  for (Eigen::Index i = 0; i < dec.eps.size(); ++i) {
    const double r = dec.R[i];
    const double e = dec.eps[i];
    nonlinear[i] = nonlinear_potential(r + e, p) - nonlinear_potential(r, p) - signed_power(r, p) * e;
  }
  const Field damped = dec.eta + mu * dec.eps;
  d.calE = gradient_norm_sq(g, dec.eps) + (1.0 - rho * mu) * l2_norm_sq(g, dec.eps) + l2_norm_sq(g, damped) -
           2.0 * trapezoid(g, nonlinear);
  return d;
}

/// |E(u) - K E(Q,0) + c_1 kappa F_+ - c_1 kappa F_-|.
inline double energy_expansion_check(const FieldState& state, const Decomposition& dec,
                                     const GroundStateConsts& consts, const ModelParams& params) {
  const auto sums = interaction_sums(dec, params.alpha);
  const double c1k = consts.c_1 * consts.kappa;
  return std::abs(energy(state, params.p) - static_cast<double>(dec.K()) * consts.E_Q + c1k * sums.F_plus -
                  c1k * sums.F_minus);
}

}  // namespace nlkg
