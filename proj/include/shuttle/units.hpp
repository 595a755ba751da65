#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "shuttle/errors.hpp"

namespace shuttle {

/// Reduced Planck constant, CODATA 2018 [J s].
inline constexpr double kHbarSI = 1.054571817e-34;

/// A particle of mass `mass` held in a harmonic trap of mean angular
/// frequency `omega0`, shuttled over `distance`, starting in level `mode`.
///
/// Every field is expressed in one consistent unit system. `hbar` is the value
/// of the reduced Planck constant in that system: kHbarSI for SI input, 1 for
/// oscillator units. All formulas in the library are written with explicit
/// hbar, mass and omega0 so they are valid in either system.
struct PhysicalSystem {
  double mass = 0.0;
  double omega0 = 0.0;
  double distance = 0.0;
  int mode = 0;
  double hbar = kHbarSI;

  double period() const { return 2.0 * std::numbers::pi / omega0; }
  double length_scale() const { return std::sqrt(hbar / (mass * omega0)); }
  double energy_quantum() const { return hbar * omega0; }
  double level_factor() const { return mode + 0.5; }
  /// Noiseless final energy hbar*omega0*(n + 1/2).
  double ground_energy() const { return hbar * omega0 * level_factor(); }
};

inline void validate(const PhysicalSystem& sys) {
  if (!(sys.mass > 0.0) || !std::isfinite(sys.mass))
    throw InvalidParameter("mass must be positive, got " + std::to_string(sys.mass));
  if (!(sys.omega0 > 0.0) || !std::isfinite(sys.omega0))
    throw InvalidParameter("omega0 must be positive, got " + std::to_string(sys.omega0));
  if (!(sys.distance >= 0.0) || !std::isfinite(sys.distance))
    throw InvalidParameter("distance must be non-negative, got " + std::to_string(sys.distance));
  if (sys.mode < 0) throw InvalidParameter("mode must be non-negative");
  if (!(sys.hbar > 0.0)) throw InvalidParameter("hbar must be positive");
}

/// 40Ca+ at omega0 = 2 pi x 1.41 MHz, moved 280 um, initial ground state.
inline PhysicalSystem calcium_reference_system() {
  return PhysicalSystem{6.642e-26, 2.0 * std::numbers::pi * 1.41e6, 280e-6, 0, kHbarSI};
}

/// Scales of the oscillator unit system (hbar = m = omega0 = 1) for a
/// particular SI system.
struct OscillatorUnits {
  double length_scale = 1.0;  // a0 = sqrt(hbar / (m omega0))  [m]
  double time_scale = 1.0;    // 1 / omega0                    [s]
  double energy_scale = 1.0;  // hbar omega0                   [J]
  double mass_scale = 1.0;    // m                             [kg]

  double to_si_length(double x) const { return x * length_scale; }
  double to_si_time(double t) const { return t * time_scale; }
  double to_si_energy(double e) const { return e * energy_scale; }
  /// Sensitivities G carry energy per time (lambda^2 has dimensions of time).
  double to_si_sensitivity(double g) const { return g * energy_scale / time_scale; }
  double to_si_lambda(double lambda) const { return lambda * std::sqrt(time_scale); }

  double from_si_length(double x) const { return x / length_scale; }
  double from_si_time(double t) const { return t / time_scale; }
  double from_si_energy(double e) const { return e / energy_scale; }
  double from_si_sensitivity(double g) const { return g * time_scale / energy_scale; }
  double from_si_lambda(double lambda) const { return lambda / std::sqrt(time_scale); }

  /// The same physical system expressed with hbar = m = omega0 = 1.
  PhysicalSystem scale(const PhysicalSystem& si) const {
    return PhysicalSystem{si.mass / mass_scale, si.omega0 * time_scale,
                          si.distance / length_scale, si.mode, si.hbar / (energy_scale * time_scale)};
  }
  PhysicalSystem unscale(const PhysicalSystem& osc) const {
    return PhysicalSystem{osc.mass * mass_scale, osc.omega0 / time_scale,
                          osc.distance * length_scale, osc.mode,
                          osc.hbar * energy_scale * time_scale};
  }
};

inline OscillatorUnits to_dimensionless(const PhysicalSystem& sys) {
  validate(sys);
  OscillatorUnits u;
  u.length_scale = sys.length_scale();
  u.time_scale = 1.0 / sys.omega0;
  u.energy_scale = sys.energy_quantum();
  u.mass_scale = sys.mass;
  return u;
}

/// Convenience: `sys` rewritten in its own oscillator units.
inline PhysicalSystem in_oscillator_units(const PhysicalSystem& sys) {
  PhysicalSystem osc = to_dimensionless(sys).scale(sys);
  // Exact by construction; remove the 1-ulp residue of the divisions.
  osc.mass = 1.0;
  osc.omega0 = 1.0;
  osc.hbar = 1.0;
  return osc;
}

}  // namespace shuttle
