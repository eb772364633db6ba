#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nlkg/experiments/wmap.hpp"
#include "nlkg/modulation.hpp"
#include "support.hpp"

using namespace nlkg;

namespace {

struct Setup {
  Grid1D grid = Grid1D::with_spacing(40.0, 0.02);
  ModelParams params = ModelParams::make(1.0, 3.0);
  Profile profile = Profile::discrete(3.0, grid);
  SpectralData spectral = compute_spectral_data(params);
};

const Setup& setup() {
  static const Setup s;
  return s;
}

// Smooth random perturbation: a few Gaussian bumps of both signs.
Field random_bumps(Gen& gen, const Grid1D& g, double amplitude) {
  Field f = g.zeros();
  for (int j = 0; j < 4; ++j) {
    const double c = gen.uniform(-8, 8), w = gen.uniform(0.5, 2), a = gen.uniform(-1, 1);
    f += g.sample([&](double x) { return amplitude * a * std::exp(-((x - c) / w) * ((x - c) / w)); });
  }
  f[0] = f[f.size() - 1] = 0.0;
  return f;
}

}  // namespace

TEST(Modulation, RecoversExactTwoSoliton) {
  const auto& s = setup();
  const std::vector<int> sigma{-1, 1};
  const std::vector<double> z{-5, 5};
  const FieldState state = soliton_sum(s.grid, s.profile, sigma, z);
  const auto dec = decompose(state, s.profile, s.spectral, sigma, std::vector<double>{-4.5, 5.5});
  EXPECT_NEAR(dec.z[0], -5.0, 1e-9);
  EXPECT_NEAR(dec.z[1], 5.0, 1e-9);
  EXPECT_NEAR(dec.ell[0], 0.0, 1e-12);
  EXPECT_NEAR(dec.ell[1], 0.0, 1e-12);
  EXPECT_LT(std::sqrt(l2_norm_sq(s.grid, dec.eps)), 1e-9);
  EXPECT_LE(dec.orthogonality_residual, 1e-10);
  const auto d = diagnostics(dec, s.grid, s.params, s.spectral, 0.5);
  EXPECT_LT(d.N, 1e-9);
  EXPECT_LT(d.b, 1e-18);
  EXPECT_NEAR(d.F_minus, std::exp(-10.0), 1e-12);
  EXPECT_EQ(d.F_plus, 0.0);
}

TEST(Modulation, SingleTranslateHasNoUnstableComponent) {
  const auto& s = setup();
  const std::vector<int> sigma{1};
  const FieldState state = soliton_sum(s.grid, s.profile, sigma, std::vector<double>{3.0});
  const auto dec = decompose(state, s.profile, s.spectral, sigma, std::vector<double>{2.6});
  EXPECT_NEAR(dec.z[0], 3.0, 1e-9);
  EXPECT_NEAR(dec.a_plus[0], 0.0, 1e-9);
  EXPECT_NEAR(dec.a_minus[0], 0.0, 1e-9);
}

TEST(Modulation, RecoversVelocities) {
  const auto& s = setup();
  const std::vector<int> sigma{1, -1, 1};
  const std::vector<double> z{-8, 0.5, 9}, ell{0.01, -0.02, 0.003};
  const FieldState state = soliton_sum(s.grid, s.profile, sigma, z, ell);
  const auto dec = decompose(state, s.profile, s.spectral, sigma, std::vector<double>{-7.7, 0.2, 9.3});
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(dec.z[k], z[k], 1e-9);
    EXPECT_NEAR(dec.ell[k], ell[k], 1e-12);
  }
  EXPECT_LT(std::sqrt(l2_norm_sq(s.grid, dec.eta)), 1e-10);
}

TEST(Modulation, TranslationEquivariance) {
  const auto& s = setup();
  Gen gen(31);
  const std::vector<int> sigma{-1, 1};
  FieldState state = soliton_sum(s.grid, s.profile, sigma, std::vector<double>{-4, 4});
  state.u += random_bumps(gen, s.grid, 1e-3);
  state.v += random_bumps(gen, s.grid, 1e-3);
  const long m = 75;
  const double shift = static_cast<double>(m) * s.grid.dx();
  FieldState moved = state;
  moved.u = shift_nodes(state.u, m);
  moved.v = shift_nodes(state.v, m);
  const auto a = decompose(state, s.profile, s.spectral, sigma, std::vector<double>{-4, 4});
  const auto b = decompose(moved, s.profile, s.spectral, sigma, std::vector<double>{-4 + shift, 4 + shift});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(b.z[k], a.z[k] + shift, 1e-10);
    EXPECT_NEAR(b.ell[k], a.ell[k], 1e-12);
    EXPECT_NEAR(b.a_plus[k], a.a_plus[k], 1e-9);
  }
  const Field eps_back = shift_nodes(a.eps, m);
  EXPECT_LT((eps_back - b.eps).segment(200, 3500).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Modulation, SignEquivariance) {
  const auto& s = setup();
  Gen gen(37);
  const std::vector<int> sigma{1, -1};
  FieldState state = soliton_sum(s.grid, s.profile, sigma, std::vector<double>{-6, 6}, std::vector<double>{1e-3, 0});
  state.u += random_bumps(gen, s.grid, 1e-3);
  FieldState neg = state;
  neg.u = -state.u;
  neg.v = -state.v;
  const std::vector<int> flipped{-1, 1};
  const auto a = decompose(state, s.profile, s.spectral, sigma, std::vector<double>{-6, 6});
  const auto b = decompose(neg, s.profile, s.spectral, flipped, std::vector<double>{-6, 6});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(a.z[k], b.z[k]);
    EXPECT_EQ(a.ell[k], b.ell[k]);
    EXPECT_EQ(a.a_plus[k], b.a_plus[k]);  // both eps and sigma_k Y flip
  }
  EXPECT_EQ((a.eps + b.eps).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Modulation, ErrorsOutsideTheTube) {
  const auto& s = setup();
  const std::vector<int> sigma{-1, 1};
  const FieldState state = soliton_sum(s.grid, s.profile, sigma, std::vector<double>{-5, 5});
  EXPECT_THROW(decompose(state, s.profile, s.spectral, sigma, std::vector<double>{-0.5, 1.0}), IllConditioned);
  FieldState big = state;
  big.u += s.grid.sample([](double x) { return 0.5 * std::exp(-x * x); });
  EXPECT_THROW(decompose(big, s.profile, s.spectral, sigma, std::vector<double>{-5, 5}), OutOfTube);
  EXPECT_THROW(decompose(state, s.profile, s.spectral, std::vector<int>{1, 2}, std::vector<double>{-5, 5}),
               InvalidParameter);
  const FieldState zero = FieldState::zero(s.grid);
  EXPECT_THROW(decompose(zero, s.profile, s.spectral, std::vector<int>{1}, std::vector<double>{0}), OutOfTube);
}

TEST(Modulation, RecoversInjectedUnstableAmplitudes) {
  const auto& s = setup();
  const std::vector<int> sigma{-1, 1};
  const std::vector<double> z{-5, 5};
  const std::vector<double> a{1e-3, -1e-3};
  FieldState state = soliton_sum(s.grid, s.profile, sigma, z);
  const WField w = build_W(a, z, sigma, s.grid, s.profile, s.spectral);
  state.u += w.W;
  state.v += w.Wt;
  const auto dec = decompose(state, s.profile, s.spectral, sigma, z);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(dec.a_plus[k] / a[k], 1.0, 0.01);
}

TEST(Modulation, MuRange) {
  const auto& s = setup();
  const std::vector<int> sigma{1};
  const auto dec = decompose(soliton_sum(s.grid, s.profile, sigma, std::vector<double>{0}), s.profile, s.spectral,
                             sigma, std::vector<double>{0});
  EXPECT_THROW(diagnostics(dec, s.grid, s.params, s.spectral, 0.0), InvalidParameter);
  EXPECT_THROW(diagnostics(dec, s.grid, s.params, s.spectral, 1.01), InvalidParameter);
  EXPECT_NO_THROW(diagnostics(dec, s.grid, s.params, s.spectral, 1.0));
  EXPECT_NEAR(default_mu(0.5, -3.0), 0.45, 1e-15);
  EXPECT_NEAR(default_mu(2.0, -0.5), 0.45, 1e-15);
}

TEST(Modulation, CoercivityBounds) {
  // mu ||e||^2 - (2 mu)^{-1} sum (a+^2 + a-^2) <= calE <= mu^{-1} ||e||^2 on random small residuals.
  const auto& s = setup();
  const double mu = 0.1;
  const std::vector<int> sigma{-1, 1};
  const std::vector<double> z{-6, 6};
  Gen gen(41);
  for (int trial = 0; trial < 20; ++trial) {
    FieldState state = soliton_sum(s.grid, s.profile, sigma, z);
    const double amp = gen.uniform(1e-4, 1e-2);
    state.u += random_bumps(gen, s.grid, amp);
    state.v += random_bumps(gen, s.grid, amp);
    const auto dec = decompose(state, s.profile, s.spectral, sigma, z);
    const auto d = diagnostics(dec, s.grid, s.params, s.spectral, mu);
    const double e_sq = d.eps_energy_norm * d.eps_energy_norm;
    double amps = 0.0;
    for (std::size_t k = 0; k < 2; ++k) amps += dec.a_plus[k] * dec.a_plus[k] + dec.a_minus[k] * dec.a_minus[k];
    EXPECT_LE(mu * e_sq - amps / (2 * mu), d.calE) << "trial " << trial;
    EXPECT_LE(d.calE, e_sq / mu) << "trial " << trial;
  }
}

TEST(Modulation, EnergyExpansionForOppositeSigns) {
  const Grid1D g = Grid1D::with_spacing(40.0, 0.005);
  const Profile prof = Profile::analytic(3.0);
  const auto params = ModelParams::make(1.0, 3.0);
  const std::vector<int> sigma{-1, 1};
  const FieldState one = soliton_sum(g, prof, std::vector<int>{1}, std::vector<double>{0});
  const double e_single = energy(one, 3.0);
  EXPECT_NEAR(e_single, 4.0 / 3.0, 1e-4);
  // Direct quadrature on the composed profile; the single-soliton energy on the
  // same grid removes the discretization offset.
  const FieldState pair10 = soliton_sum(g, prof, sigma, std::vector<double>{-5, 5});
  EXPECT_NEAR(energy(pair10, 3.0) - 2 * e_single, 16 * std::exp(-10.0), 3 * std::exp(-12.0));
  const FieldState pair20 = soliton_sum(g, prof, sigma, std::vector<double>{-10, 10});
  EXPECT_NEAR(energy(pair20, 3.0), 8.0 / 3.0, 1e-3);
  EXPECT_LT(std::abs(energy(pair20, 3.0) - 2 * e_single), 1e-7);

  const auto spectral = compute_spectral_data(params);
  const auto consts = compute_constants(3.0);
  const auto dec = decompose(pair10, prof, spectral, sigma, std::vector<double>{-5, 5});
  EXPECT_LT(energy_expansion_check(pair10, dec, consts, params), 3 * std::exp(-12.0));
}

TEST(Modulation, SameSignPairLowersEnergy) {
  const Grid1D g = Grid1D::with_spacing(40.0, 0.005);
  const Profile prof = Profile::analytic(3.0);
  const std::vector<int> sigma{1, 1};
  const double e_single = energy(soliton_sum(g, prof, std::vector<int>{1}, std::vector<double>{0}), 3.0);
  const FieldState pair = soliton_sum(g, prof, sigma, std::vector<double>{-5, 5});
  const double gap = energy(pair, 3.0) - 2 * e_single;
  EXPECT_LT(gap, 0.0);
  EXPECT_NEAR(gap, -16 * std::exp(-10.0), 3 * std::exp(-12.0));
  const auto params = ModelParams::make(1.0, 3.0);
  const auto dec = decompose(pair, prof, compute_spectral_data(params), sigma, std::vector<double>{-5, 5});
  const auto d = diagnostics(dec, g, params, compute_spectral_data(params), 0.5);
  EXPECT_NEAR(d.F_plus, std::exp(-10.0), 1e-12);
  EXPECT_EQ(d.F_minus, 0.0);
}
