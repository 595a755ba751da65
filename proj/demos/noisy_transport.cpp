// Monte Carlo of a single noisy transport compared with the perturbative
// prediction, for the quintic and the cosine protocol.
#include <cstdio>
#include <string>
#include <numbers>

#include "shuttle/shuttle.hpp"

int main() {
  using namespace shuttle;
  const auto sys = in_oscillator_units(calcium_reference_system());
  const double T0 = 2.0 * std::numbers::pi;
  const double T = 5.0 * T0, tau = 0.5 * T0, lambda = 0.01;
  const auto noise = NoiseModel::ou(tau);

  for (const auto& traj : {make_poly5(T, sys.distance), make_cosine3(T, sys.distance)}) {
    const auto rep = run_monte_carlo(traj, noise, lambda, 2000, 42, sys);
    std::printf("%-8s  <E - E0> = %.4e +/- %.1e   lambda^2 (G1 + G2) = %.4e   ratio %.3f\n",
                std::string(to_string(traj.ansatz())).c_str(), rep.mean_excitation, rep.std_error, rep.predicted,
                rep.ratio);
  }
}
