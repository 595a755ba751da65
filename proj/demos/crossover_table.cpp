// Prints, for a few noise correlation times, the transport time at which the
// trap-position contribution G2 drops below the spring-constant contribution G1,
// and the transport time that minimizes their sum.
#include <cstdio>
#include <numbers>

#include "shuttle/shuttle.hpp"

int main() {
  using namespace shuttle;
  const auto sys = in_oscillator_units(calcium_reference_system());
  const double T0 = 2.0 * std::numbers::pi;

  std::printf("%10s %12s %12s %14s\n", "tau/T0", "t_cross/T0", "t_opt/T0", "G_min");
  for (double tau : {0.001, 0.01, 0.1, 1.0, 2.0, 5.0}) {
    const auto c = crossover_T(tau * T0, sys);
    const auto o = optimal_T(tau * T0, sys);
    std::printf("%10.3f %12.4f %12.4f %14.6e\n", tau, c.t_cross / T0, o.t_opt / T0, o.g_min);
  }
}
