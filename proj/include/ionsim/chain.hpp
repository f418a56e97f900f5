#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/trap.hpp"

namespace ionsim {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Coordinates are packed per ion: index 3*j + axis, axes (x, y, z), meters.
struct ChainConfiguration {
  std::vector<IonSpecies> species;
  VecX positions;                // 3N
  double potential_energy = 0.0; // J
  double gradient_norm = 0.0;    // N
  bool converged = false;
};

struct EquilibriumOptions {
  long max_iterations = 100000;
  double position_tol = 1.0e-15;        // m, max per-coordinate update
  double gradient_tol_per_ion = 1.0e-22; // N, scaled by ion count
  double escape_radius = 1.0e-3;        // m, divergence guard
  // Constant external force on each ion (N); empty means none.
  std::vector<Vec3> external_forces;
};

// Total potential energy (J) of the chain: trap terms plus Coulomb.
double chain_potential(const TrapModel& trap,
                       const std::vector<IonSpecies>& species,
                       const VecX& positions,
                       const std::vector<Vec3>& external_forces = {});

VecX chain_gradient(const TrapModel& trap,
                    const std::vector<IonSpecies>& species,
                    const VecX& positions,
                    const std::vector<Vec3>& external_forces = {});

MatX chain_hessian(const TrapModel& trap,
                   const std::vector<IonSpecies>& species,
                   const VecX& positions,
                   const std::vector<Vec3>& external_forces = {});

// Ions equally spaced along z with the two-ion equilibrium spacing of the
// lightest species as the pitch.
VecX default_seed_positions(const TrapModel& trap,
                            const std::vector<IonSpecies>& species);

// Local minimum of the chain potential by damped Newton descent with
// Hessian regularization; saddle points are escaped along the negative
// curvature direction (deterministic sign convention). Falls back to
// axis-permuted seeds if the primary seed fails. The returned energy never
// exceeds the energy at the seed. Throws InstabilityError if the trap is
// unstable for any species present and ConvergenceError (carrying the last
// iterate) if the iteration cap is exhausted.
ChainConfiguration find_equilibrium(const TrapModel& trap,
                                    const std::vector<IonSpecies>& species,
                                    std::optional<VecX> seed = std::nullopt,
                                    const EquilibriumOptions& opts = {});

// Same descent from an explicit start, without seed fallbacks; used by the
// quasi-static continuation. Energy is non-increasing along the descent.
// Throws ConvergenceError if any coordinate escapes opts.escape_radius.
ChainConfiguration relax(const TrapModel& trap,
                         const std::vector<IonSpecies>& species,
                         const VecX& start, const EquilibriumOptions& opts = {});

} // namespace ionsim
