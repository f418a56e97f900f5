#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/chain.hpp"

namespace ionsim {

// Eigenanalysis of the mass-weighted Hessian at an equilibrium.
// Column alpha of `eigenvectors` is the mass-weighted mode vector e', with
// the sign convention that the component of largest magnitude is positive
// (ties resolve to the lowest coordinate index). Modes are sorted by
// ascending omega^2; unstable curvatures are reported with stable = false
// and frequency = sqrt(|omega^2|).
struct NormalModeSet {
  ChainConfiguration config;
  VecX omega_sq;      // (rad/s)^2, ascending
  VecX frequencies;   // rad/s, sqrt(|omega_sq|)
  MatX eigenvectors;  // 3N x 3N, orthonormal
  std::vector<bool> stable;
  std::vector<std::string> warnings;

  double frequency_hz(int mode) const;
  // e' restricted to ion j (3 components) for the given mode.
  Vec3 ion_component(int ion, int mode) const;
};

NormalModeSet normal_modes(const TrapModel& trap,
                           const ChainConfiguration& config,
                           const std::vector<Vec3>& external_forces = {});

// find_equilibrium followed by normal_modes.
NormalModeSet solve_modes(const TrapModel& trap,
                          const std::vector<IonSpecies>& species);

// RMS ground-state wavepacket extent (m) of ion j in the given mode:
// sqrt(hbar / (2 m_j omega)) |e'_j|. Components resolve per axis.
double ground_state_extent(const NormalModeSet& modes, int ion, int mode);
Vec3 ground_state_extent_components(const NormalModeSet& modes, int ion,
                                    int mode);

// Lamb-Dicke parameter of ion j in the given mode for wavevector k (rad/m):
// sqrt(hbar / (2 m_j omega)) (k . e'_j). Signed; zero iff k is orthogonal
// to the ion's mode participation.
double lamb_dicke(const NormalModeSet& modes, const Vec3& wavevector, int ion,
                  int mode);

// Mode frequency from the resonance positions of the red and blue sidebands
// relative to the carrier; common (AC-Zeeman-like) offsets cancel.
double extract_mode_frequency(double red_detuning, double blue_detuning);

} // namespace ionsim
