#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlkg/errors.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/grid.hpp"
#include "nlkg/solver.hpp"
#include "nlkg/spectrum.hpp"

namespace nlkg {

struct WField {
  Field W;
  Field Wt;  // nu^+ W
  std::vector<double> B;
  std::vector<double> V;
};

/// W = sum_k B_k Y_k + V_k d_x Q_k with <W, d_x Q_k> = 0 and <W, Y_k> = beta a_k,
/// so that (W, nu^+ W) has unstable amplitude a_k on the k-th soliton.
inline WField build_W(std::span<const double> a, std::span<const double> z, std::span<const int> sigma,
                      const Grid1D& g, const Profile& profile, const SpectralData& spectral,
                      double min_spacing = 5.0) {
  const std::size_t K = z.size();
  if (K == 0 || a.size() != K || sigma.size() != K) throw InvalidParameter("build_W: need K amplitudes, centers, signs");
  for (double v : a) {
    if (!std::isfinite(v)) throw InvalidParameter("build_W: amplitudes must be finite");
  }
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (!(z[k + 1] - z[k] >= min_spacing)) {
      throw IllConditioned("build_W: centers closer than " + std::to_string(min_spacing));
    }
  }
  std::vector<Field> Y(K), dQ(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double s = static_cast<double>(sigma[k]);
    Y[k] = s * spectral.Y_on(g, z[k]);
    dQ[k] = g.sample([&](double x) { return s * profile.eval(x - z[k]).d1; });
  }
  // Unknowns (B_1..B_K, V_1..V_K); rows: <W, Y_k> then <W, dQ_k>.
  const auto n = static_cast<Eigen::Index>(2 * K);
  const auto kK = static_cast<Eigen::Index>(K);
  Eigen::MatrixXd M(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t r = 0; r < K; ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < K; ++c) {
      const auto j = static_cast<Eigen::Index>(c);
      M(i, j) = inner(g, Y[c], Y[r]);
      M(i, kK + j) = inner(g, dQ[c], Y[r]);
      M(kK + i, j) = inner(g, Y[c], dQ[r]);
      M(kK + i, kK + j) = inner(g, dQ[c], dQ[r]);
    }
    rhs[i] = spectral.beta * a[r];
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (lu.rank() < n || lu.rcond() < 1e-12) throw IllConditioned("build_W: Gram system is singular");
  const Eigen::VectorXd coef = lu.solve(rhs);

  WField out;
  out.W = g.zeros();
  out.B.resize(K);
  out.V.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    out.B[k] = coef[static_cast<Eigen::Index>(k)];
    out.V[k] = coef[kK + static_cast<Eigen::Index>(k)];
    out.W += out.B[k] * Y[k] + out.V[k] * dQ[k];
  }
  out.Wt = spectral.nu_plus * out.W;
  return out;
}

/// <(w, wt), Z_k^+> = zeta^+ <w, Y_k> + <wt, Y_k>.
inline double unstable_projection(const Grid1D& g, const Field& w, const Field& wt, double z, int sigma,
                                  const SpectralData& spectral) {
  const Field Yk = static_cast<double>(sigma) * spectral.Y_on(g, z);
  return spectral.zeta_plus * inner(g, w, Yk) + inner(g, wt, Yk);
}

}  // namespace nlkg
