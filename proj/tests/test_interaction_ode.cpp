#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <vector>

#include "nlkg/interaction_ode.hpp"
#include "support.hpp"

using namespace nlkg;

namespace {

void expect_defining_relations(const AsymptoticProfile& p) {
  EXPECT_NEAR(std::accumulate(p.tau.begin(), p.tau.end(), 0.0), 0.0, 1e-14);
  for (std::size_t k = 0; k + 1 < p.tau.size(); ++k) {
    const double lhs = std::exp(-(p.tau[k + 1] - p.tau[k]));
    EXPECT_NEAR(lhs / (2 * p.alpha / p.kappa * p.gamma[k]), 1.0, 1e-14);
  }
}

}  // namespace

TEST(InteractionOde, GammaCoefficients) {
  EXPECT_EQ(gamma_coefficients(2), (std::vector<double>{0.5}));
  EXPECT_EQ(gamma_coefficients(3), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(gamma_coefficients(4), (std::vector<double>{1.5, 2.0, 1.5}));
  EXPECT_THROW(gamma_coefficients(1), InvalidParameter);
}

TEST(InteractionOde, TauProfileTwoCenters) {
  const auto p = tau_profile(2, 1.0, 12.0);
  EXPECT_NEAR(p.tau[0], -0.5 * std::log(12.0), 1e-14);
  EXPECT_NEAR(p.tau[1], 0.5 * std::log(12.0), 1e-14);
  EXPECT_NEAR(p.tau[1], 1.2425, 1e-4);
  expect_defining_relations(p);
}

TEST(InteractionOde, TauProfileThreeCenters) {
  const auto p = tau_profile(3, 1.0, 12.0);
  EXPECT_NEAR(p.tau[0], -std::log(6.0), 1e-14);
  EXPECT_NEAR(p.tau[1], 0.0, 1e-14);
  EXPECT_NEAR(p.tau[2], std::log(6.0), 1e-14);
  expect_defining_relations(p);
  EXPECT_THROW(tau_profile(1, 1.0, 12.0), InvalidParameter);
  EXPECT_THROW(tau_profile(2, 0.0, 12.0), InvalidParameter);
}

TEST(InteractionOde, ExactProfile) {
  const auto p = tau_profile(2, 1.0, 12.0);
  const auto y1 = exact_profile_y(1.0, p);
  EXPECT_EQ(y1[0], p.tau[0]);
  EXPECT_EQ(y1[1], p.tau[1]);
  for (double t : {1.0, 10.0, 100.0}) {
    EXPECT_LE(profile_residual(t, p), 1e-12);
    const auto y = exact_profile_y(t, p);
    EXPECT_NEAR(y[0] + y[1], 0.0, 1e-13);
    // e^{ybar_2 - ybar_1} = t kappa / (2 alpha gamma_1)
    EXPECT_NEAR(std::exp(y[1] - y[0]) / (t * 12.0 / (2 * 0.5)), 1.0, 1e-13);
  }
  EXPECT_THROW(exact_profile_y(0.0, p), InvalidParameter);
}

TEST(InteractionOde, ProfileResidualVanishesForRandomParameters) {
  Gen gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = gen.integer(2, 6);
    const auto p = tau_profile(K, gen.uniform(0.05, 5.0), gen.uniform(0.5, 50.0));
    for (double t : {1.0, 37.0, 1e3}) EXPECT_LE(profile_residual(t, p) * t, 1e-12);
  }
}

TEST(InteractionOde, IntegrationFollowsExactProfile) {
  for (int K : {2, 3, 4}) {
    const auto p = tau_profile(K, 1.0, 12.0);
    const auto times = log_spaced(10.0, 1e4, 100);
    const auto traj = integrate_centers(exact_profile_y(10.0, p), times, 1.0, 12.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto ybar = exact_profile_y(times[i], p);
      for (int k = 0; k < K; ++k) worst = std::max(worst, std::abs(traj.y[i][k] - ybar[k]));
    }
    EXPECT_LE(worst, 1e-6) << "K=" << K;
    EXPECT_LE(traj.mean_drift, 1e-10);
    EXPECT_EQ(traj.ordering_violations, 0u);
  }
}

TEST(InteractionOde, SymmetricPairStaysSymmetric) {
  const auto times = log_spaced(1.0, 1e3, 50);
  const std::vector<double> y0{-2.0, 2.0};
  const auto traj = integrate_centers(y0, times, 0.7, 5.0);
  for (const auto& y : traj.y) EXPECT_NEAR(y[0], -y[1], 1e-12);
  EXPECT_GT(traj.y.back()[1], 2.0);
}

TEST(InteractionOde, RejectsBadInput) {
  const auto times = log_spaced(1.0, 10.0, 5);
  EXPECT_THROW(integrate_centers(std::vector<double>{1.0, 0.0}, times, 1.0, 1.0), InvalidParameter);
  EXPECT_THROW(integrate_centers(std::vector<double>{0.0}, times, 1.0, 1.0), InvalidParameter);
  EXPECT_THROW(integrate_centers(std::vector<double>{0.0, 1.0}, std::vector<double>{2.0, 1.0}, 1.0, 1.0),
               InvalidParameter);
  EXPECT_THROW(log_spaced(0.0, 1.0, 10), InvalidParameter);
}

TEST(InteractionOde, CollapsingDataReportsStiffness) {
  // An interaction constant near the overflow limit drives the state to infinity.
  const std::vector<double> y0{0.0, 1e-3};
  EXPECT_THROW(integrate_centers(y0, log_spaced(1.0, 1e6, 10), 1e-3, 1e306), StiffnessError);
}

TEST(InteractionOde, PhiAndItsJacobian) {
  const auto gamma = gamma_coefficients(4);
  const auto zero = phi(std::vector<double>(4, 0.0), gamma);
  for (double v : zero) EXPECT_EQ(v, 0.0);
  const auto shift = phi(std::vector<double>(4, 0.37), gamma);
  for (double v : shift) EXPECT_EQ(v, 0.0);

  const Eigen::MatrixXd m2 = dphi0(2);
  EXPECT_EQ(m2(0, 0), -0.5);
  EXPECT_EQ(m2(0, 1), 0.5);
  EXPECT_EQ(m2(1, 0), 0.5);
  EXPECT_EQ(m2(1, 1), -0.5);

  // Finite-difference Jacobian of phi at the origin.
  const double h = 1e-6;
  const Eigen::MatrixXd m4 = dphi0(4);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> wp(4, 0.0), wm(4, 0.0);
    wp[j] = h;
    wm[j] = -h;
    const auto fp = phi(wp, gamma), fm = phi(wm, gamma);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR((fp[i] - fm[i]) / (2 * h), m4(i, j), 1e-8);
  }
}

TEST(InteractionOde, JacobianSpectrum) {
  for (int K = 2; K <= 8; ++K) {
    const Eigen::MatrixXd m = dphi0(K);
    EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE(m.rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
    EXPECT_NEAR(ev[K - 1], 0.0, 1e-12);
    EXPECT_LE(ev[K - 2], -1.0 + 1e-12) << "K=" << K;
  }
  const Eigen::VectorXd ev2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dphi0(2)).eigenvalues();
  EXPECT_NEAR(ev2[0], -1.0, 1e-15);
}

TEST(InteractionOde, DiagonalShiftIsStationary) {
  const std::vector<double> xi0{0.2, 0.2, 0.2};
  const auto run = xi_convergence_run(xi0, 10.0, 1e4);
  for (const auto& w : run.varpi) {
    for (double v : w) EXPECT_NEAR(v, 0.2, 1e-14);
  }
  EXPECT_LE(run.sup_scaled_deviation, 1e-13);
}

TEST(InteractionOde, ScaledDeviationStaysBounded) {
  const std::vector<double> xi0{0.3, -0.3};
  const auto run = xi_convergence_run(xi0, 10.0, 1e4);
  EXPECT_LT(run.sup_scaled_deviation, 2.0);
  EXPECT_LT(std::abs(run.late_trend), 0.05);
  EXPECT_LE(run.mean_drift, 1e-10);
  EXPECT_THROW(xi_convergence_run(std::vector<double>{1.0, -1.0}, 10.0, 100.0), InvalidParameter);
}

TEST(InteractionOde, SmallDataDecaysAtLinearRate) {
  // Slowest nonzero eigenvalue of DPhi(0) is -1 for K = 2 and K = 3.
  for (const std::vector<double>& xi0 : {std::vector<double>{7e-4, -7e-4}, std::vector<double>{-7e-4, 0.0, 7e-4}}) {
    const auto run = xi_convergence_run(xi0, 10.0, 1e4);
    EXPECT_NEAR(run.fitted_rate, -1.0, 1e-3);
  }
}
