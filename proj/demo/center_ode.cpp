// Three centers started off the logarithmic profile relax onto it.

#include <cstdio>
#include <vector>

#include "nlkg/nlkg.hpp"

int main() {
  using namespace nlkg;
  const double alpha = 1.0, kappa = 12.0;
  const auto prof = tau_profile(3, alpha, kappa);
  const std::vector<double> y0{-3.0, 0.5, 2.5};
  const auto times = log_spaced(10.0, 1e5, 9);
  const auto traj = integrate_centers(y0, times, alpha, kappa);
  std::printf("%12s %10s %10s %10s   %s\n", "t", "y_1", "y_2", "y_3", "max |y - ybar|");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto ybar = exact_profile_y(times[i], prof);
    double dev = 0.0;
    for (std::size_t k = 0; k < 3; ++k) dev = std::max(dev, std::abs(traj.y[i][k] - ybar[k]));
    std::printf("%12.1f %10.5f %10.5f %10.5f   %.3e\n", times[i], traj.y[i][0], traj.y[i][1], traj.y[i][2], dev);
  }
}
