#include "ionsim/shifts.hpp"

#include <cmath>
#include <stdexcept>

#include "ionsim/trap.hpp"

namespace ionsim {

namespace {

// Highest-frequency mode moving dominantly along z: the axial out-of-phase
// branch of a two-ion chain (the in-phase branch lies below it).
int axial_oop_index(const NormalModeSet& modes) {
  const int n = static_cast<int>(modes.frequencies.size());
  int found = -1;
  for (int m = 0; m < n; ++m) {
    double along = 0.0, total = 0.0;
    for (std::size_t j = 0; j < modes.config.species.size(); ++j) {
      const Vec3 e = modes.ion_component(static_cast<int>(j), m);
      along += e[2] * e[2];
      total += e.squaredNorm();
    }
    if (along > 0.5 * total) found = m;
  }
  if (found < 0)
    throw std::domain_error("no mode is dominantly axial");
  return found;
}

} // namespace

OrderShiftResult order_dependent_shift(const TrapModel& trap,
                                       const IonSpecies& a,
                                       const IonSpecies& b,
                                       const std::vector<Vec3>& forces) {
  if (!forces.empty() && forces.size() != 2)
    throw std::invalid_argument(
        "order shift takes one force per ion of the pair");
  const std::vector<IonSpecies> fwd{a, b}, rev{b, a};
  std::vector<Vec3> forces_rev;
  if (!forces.empty()) forces_rev = {forces[1], forces[0]};

  EquilibriumOptions opt_fwd, opt_rev;
  opt_fwd.external_forces = forces;
  opt_rev.external_forces = forces_rev;

  OrderShiftResult out;
  out.forward = normal_modes(
      trap, find_equilibrium(trap, fwd, std::nullopt, opt_fwd), forces);
  out.reversed = normal_modes(
      trap, find_equilibrium(trap, rev, std::nullopt, opt_rev), forces_rev);
  const int n = static_cast<int>(out.forward.frequencies.size());
  out.delta_hz.resize(n);
  for (int m = 0; m < n; ++m)
    out.delta_hz[m] = out.forward.frequency_hz(m) - out.reversed.frequency_hz(m);
  return out;
}

DisplacementShift radiation_pressure_displacement(
    const TrapModel& trap, const ChainConfiguration& config, int ion,
    const Vec3& force) {
  if (config.species.size() != 2)
    throw std::invalid_argument(
        "displacement response is defined for a two-ion chain");
  if (ion < 0 || ion > 1) throw std::out_of_range("ion index out of range");

  const IonSpecies& pushed = config.species[static_cast<std::size_t>(ion)];
  const double omega_sq = secular_omega_sq(trap, pushed)[2];
  const Vec3 r0 = config.positions.segment<3>(0);
  const Vec3 r1 = config.positions.segment<3>(3);

  DisplacementShift out;
  out.spacing = (r1 - r0).norm();
  out.epsilon = force.norm() / (pushed.mass_kg() * omega_sq);
  if (force.norm() == 0.0) {
    out.factor = 1.0;
    out.analytic = config.species[0].mass_amu == config.species[1].mass_amu;
    return out;
  }

  const bool equal_masses =
      config.species[0].mass_amu == config.species[1].mass_amu &&
      config.species[0].charge == config.species[1].charge;
  if (equal_masses) {
    // Published closed form: the out-of-phase frequency changes by
    // 1 -+ eps/(2d), softening when the force stretches the pair.
    const Vec3 away = (ion == 0) ? (r0 - r1) : (r1 - r0);
    const double stretch = force.dot(away.normalized());
    out.factor = 1.0 - (stretch >= 0.0 ? 1.0 : -1.0) * out.epsilon /
                           (2.0 * out.spacing);
    out.analytic = true;
    return out;
  }

  // Unequal masses: recompute the shifted equilibrium and rediagonalize.
  NormalModeSet base = normal_modes(trap, config);
  const int oop = axial_oop_index(base);
  std::vector<Vec3> forces(2, Vec3::Zero());
  forces[static_cast<std::size_t>(ion)] = force;
  EquilibriumOptions opts;
  opts.external_forces = forces;
  NormalModeSet shifted = normal_modes(
      trap,
      find_equilibrium(trap, config.species, config.positions, opts),
      forces);
  int pick = 0;
  double overlap = -1.0;
  for (int c = 0; c < shifted.eigenvectors.cols(); ++c) {
    const double o = std::abs(
        base.eigenvectors.col(oop).dot(shifted.eigenvectors.col(c)));
    if (o > overlap) {
      overlap = o;
      pick = c;
    }
  }
  out.factor = shifted.frequency_hz(pick) / base.frequency_hz(oop);
  out.analytic = false;
  return out;
}

} // namespace ionsim
