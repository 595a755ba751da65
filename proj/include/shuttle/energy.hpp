#pragma once

#include <cmath>

#include "shuttle/errors.hpp"
#include "shuttle/units.hpp"

namespace shuttle {

/// Solution of the Ermakov and Newton auxiliary equations at one instant.
struct AuxiliaryState {
  double rho = 1.0;
  double rho_dot = 0.0;
  double qc = 0.0;
  double qc_dot = 0.0;
};

/// Final energy minus the noiseless value hbar*omega0*(n+1/2).
///
/// Uses (1 + rho^4)/rho^2 - 2 = (rho^2 - 1)^2 / rho^2 so the result keeps full
/// relative precision when the excitation is many orders below hbar*omega0.
inline double excitation(const AuxiliaryState& s, const PhysicalSystem& sys) {
  if (!(s.rho > 0.0)) throw SingularState("final state has rho <= 0", 0.0);
  const double level = 2.0 * sys.mode + 1.0;
  const double dq = s.qc - sys.distance;
  const double r2 = s.rho * s.rho;
  const double width = (r2 - 1.0) * (r2 - 1.0) / r2;
  return 0.5 * sys.mass * sys.omega0 * sys.omega0 * dq * dq +
         0.25 * sys.hbar * sys.omega0 * level * width + 0.5 * sys.mass * s.qc_dot * s.qc_dot +
         0.25 * sys.hbar / sys.omega0 * level * s.rho_dot * s.rho_dot;
}

/// Energy of transport mode n in the final trap (frequency omega0, centre d).
inline double final_energy(const AuxiliaryState& s, const PhysicalSystem& sys) {
  return sys.ground_energy() + excitation(s, sys);
}

}  // namespace shuttle
