// Ground-state constants and linearized rates for a few exponents.

#include <cstdio>

#include "nlkg/nlkg.hpp"

int main() {
  using namespace nlkg;
  std::printf("%5s %12s %12s %12s %12s %12s\n", "p", "c_1", "kappa", "E_Q", "nu_plus", "nu_minus");
  for (double p : {2.5, 3.0, 4.0, 5.0}) {
    const auto c = compute_constants(p);
    const auto s = compute_spectral_data(ModelParams::make(1.0, p), {40.0, 4097});
    std::printf("%5.2f %12.8f %12.8f %12.8f %12.8f %12.8f\n", p, c.c_1, c.kappa, c.E_Q, s.nu_plus, s.nu_minus);
  }
}
