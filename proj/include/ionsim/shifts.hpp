#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ionsim/modes.hpp"

namespace ionsim {

// Mode spectra of a two-ion chain in both left-to-right orders under the
// trap's odd-in-z perturbations (axial gradient, cubic term, per-ion
// forces). `delta_hz[m]` is frequency(order a,b) - frequency(order b,a) for
// the m-th ascending mode; it vanishes identically when nothing breaks the
// mirror symmetry.
struct OrderShiftResult {
  NormalModeSet forward;   // species order (a, b) along +z
  NormalModeSet reversed;  // species order (b, a)
  VecX delta_hz;
};

// Per-slot external forces follow the species when the order is reversed
// (a laser pushes a particular species, not a position).
OrderShiftResult order_dependent_shift(const TrapModel& trap,
                                       const IonSpecies& a,
                                       const IonSpecies& b,
                                       const std::vector<Vec3>& forces = {});

// Equilibrium-displacement response of a two-ion chain to a constant force
// on one ion: epsilon = |F| / (m_j omega_z^2) and the induced change of the
// axial out-of-phase frequency. For equal masses the published closed form
// 1 -+ epsilon/(2 d) is returned (sign by whether the force stretches or
// compresses the pair); for unequal masses the frequency ratio is
// recomputed numerically from the shifted equilibrium.
struct DisplacementShift {
  double epsilon = 0.0;     // m
  double spacing = 0.0;     // unperturbed ion spacing, m
  double factor = 1.0;      // forced / unforced axial oop frequency
  bool analytic = false;    // true when the equal-mass closed form was used
};

DisplacementShift radiation_pressure_displacement(
    const TrapModel& trap, const ChainConfiguration& config, int ion,
    const Vec3& force);

} // namespace ionsim
