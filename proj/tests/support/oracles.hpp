// Independent reference implementations used only by the test suite.
// Each oracle recomputes a library result by a different method so agreement
// is evidence of correctness rather than of shared code paths.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <ionsim/chain.hpp>
#include <ionsim/constants.hpp>
#include <ionsim/trap.hpp>

namespace oracles {

using ionsim::MatX;
using ionsim::Vec3;
using ionsim::VecX;

// Finite-difference Hessian of the chain potential from a five-point stencil
// on the gradient. The fourth-order stencil keeps the truncation error of the
// stiff Coulomb terms far below 1e-6 relative at micrometer geometries, where
// a plain central difference at the same step is only good to ~1e-5.
inline MatX fd_hessian(const ionsim::TrapModel& trap,
                       const std::vector<ionsim::IonSpecies>& species,
                       const VecX& positions,
                       const std::vector<Vec3>& forces = {},
                       double h = 1.0e-9) {
  const int n = static_cast<int>(positions.size());
  auto grad_at = [&](int i, double step) {
    VecX p = positions;
    p[i] += step;
    return ionsim::chain_gradient(trap, species, p, forces);
  };
  MatX hess(n, n);
  for (int i = 0; i < n; ++i)
    hess.col(i) = (-grad_at(i, 2.0 * h) + 8.0 * grad_at(i, h) -
                   8.0 * grad_at(i, -h) + grad_at(i, -2.0 * h)) /
                  (12.0 * h);
  // Symmetrize: the analytic Hessian is exactly symmetric, the differenced
  // one only up to O(h^2).
  return 0.5 * (hess + hess.transpose());
}

// Eigenfrequencies (rad/s, ascending, sign of omega^2 preserved via
// sqrt(|.|)) from a finite-difference mass-weighted Hessian.
inline VecX fd_mode_frequencies(const ionsim::TrapModel& trap,
                                const std::vector<ionsim::IonSpecies>& species,
                                const VecX& positions) {
  const int n = static_cast<int>(positions.size());
  MatX hess = fd_hessian(trap, species, positions);
  VecX inv_sqrt_m(n);
  for (int j = 0; j < n / 3; ++j)
    for (int a = 0; a < 3; ++a)
      inv_sqrt_m[3 * j + a] = 1.0 / std::sqrt(species[j].mass_kg());
  MatX weighted = inv_sqrt_m.asDiagonal() * hess * inv_sqrt_m.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatX> solver(weighted);
  VecX freq(n);
  for (int i = 0; i < n; ++i)
    freq[i] = std::sqrt(std::abs(solver.eigenvalues()[i]));
  return freq;
}

// One-dimensional force-balance solver for a two-ion axial chain with
// per-ion spring constants k1, k2 (N/m), per-ion constant axial forces
// f1, f2 (N) and an optional cubic energy coefficient c3 (J/m^3) acting on
// both ions. Solves the coupled scalar equations by damped fixed-point
// iteration on the pair (z1, z2); completely independent of the library's
// Newton machinery.
struct AxialBalance {
  double z1 = 0.0, z2 = 0.0;
  bool converged = false;
};

inline AxialBalance axial_force_balance(double k1, double k2, double f1,
                                        double f2, double c3, double d_seed) {
  const double kc = ionsim::constants::unit_charge_coulomb;
  double z1 = -d_seed / 2.0, z2 = d_seed / 2.0;
  AxialBalance out;
  for (int it = 0; it < 200000; ++it) {
    const double d = z2 - z1;
    if (!(d > 0.0)) return out;
    const double coul = kc / (d * d);
    // Gradients of U = k z^2/2 + c3 z^3 - f z + kc/(z2 - z1): the pair term
    // contributes +kc/d^2 to dU/dz1 and -kc/d^2 to dU/dz2.
    const double g1 = k1 * z1 + 3.0 * c3 * z1 * z1 - f1 + coul;
    const double g2 = k2 * z2 + 3.0 * c3 * z2 * z2 - f2 - coul;
    const double step = 0.2 / std::max(k1, k2);
    z1 -= step * g1;
    z2 -= step * g2;
    if (std::abs(g1) < 1e-25 && std::abs(g2) < 1e-25) {
      out.converged = true;
      break;
    }
  }
  out.z1 = z1;
  out.z2 = z2;
  return out;
}

// Pade matrix exponential wrapper; the pulse-engine oracle builds the
// written ladder Hamiltonian densely and exponentiates it here.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& m) { return m.exp(); }

// Multistart global-minimum search: relax from `starts` random position sets
// drawn within `radius` of the given center and return the lowest-energy
// converged configuration.
inline ionsim::ChainConfiguration multistart_minimum(
    const ionsim::TrapModel& trap,
    const std::vector<ionsim::IonSpecies>& species, const VecX& center,
    double radius, int starts, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-radius, radius);
  ionsim::ChainConfiguration best;
  bool have = false;
  for (int s = 0; s < starts; ++s) {
    VecX start = center;
    for (int i = 0; i < start.size(); ++i) start[i] += jitter(rng);
    try {
      auto cfg = ionsim::relax(trap, species, start);
      if (!have || cfg.potential_energy < best.potential_energy) {
        best = cfg;
        have = true;
      }
    } catch (const std::exception&) {
      // Diverged starts are simply skipped.
    }
  }
  return best;
}

}  // namespace oracles
