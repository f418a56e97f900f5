#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ionsim/qls/state.hpp"

namespace ionsim {

enum class PulseKind { carrier, red_sideband, blue_sideband, displacement };

// A laser pulse on the shared motional mode.
//
// For sidebands and carriers, `theta` is the rotation angle of the first
// target's two-level transition: a blue sideband rotates each
// (lower, n) <-> (upper, n+1) pair by theta*sqrt(n+1), a red sideband
// rotates (lower, n) <-> (upper, n-1) by theta*sqrt(n), and a carrier
// rotates (lower, n) <-> (upper, n) by theta. Additional targets couple
// simultaneously with relative strength eta[j]/eta[0] (a shared-mode
// ladder, integrated exactly per excitation manifold).
//
// A displacement pulse applies D(alpha) = exp(alpha a^dag - conj(alpha) a)
// to the motion; `targets`, `theta`, and the level labels are ignored.
struct Pulse {
  PulseKind kind = PulseKind::carrier;
  std::vector<int> targets;
  double theta = 0.0;
  std::complex<double> alpha{0.0, 0.0};
  std::vector<double> eta; // per-target Lamb-Dicke factor
  std::string lower = "g";
  std::string upper = "e";
  // Carrier only: scale the angle of each (lower, n) <-> (upper, n) pair by
  // the motional-dephasing factor 1 - eta^2 (2n + 1) / 2.
  bool debye_waller = false;
};

// The truncated displacement operator on Fock levels 0..n_max.
MatXc displacement_operator(std::complex<double> alpha, int n_max);

// Applies one pulse to a copy of the state. The edge Fock population must
// stay below 1e-6 before and after, else TruncationError.
JointState apply_pulse(const JointState& state, const Pulse& pulse);

} // namespace ionsim
