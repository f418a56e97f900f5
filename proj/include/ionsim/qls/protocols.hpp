#pragma once

#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ionsim/qls/detect.hpp"
#include "ionsim/qls/pulse.hpp"
#include "ionsim/qls/state.hpp"

namespace ionsim {

// --- building blocks -------------------------------------------------------

// One Bernoulli decay trial with p = 1 - exp(-elapsed/lifetime). On decay
// the channel's upper-level amplitude moves to the lower level with the
// motional state unchanged (jump semantics: any pre-existing lower-level
// amplitude of the same configuration is projected out, since the emitted
// photon marks the ion as having been in the upper level). Photon recoil is
// neglected.
JointState spontaneous_decay(const JointState& state, int ion,
                             const DecayChannel& channel, double elapsed_s,
                             std::mt19937_64& rng);

// Thermal mean occupation for a given ground-state fraction P(0), under
// P(0) = 1/(nbar + 1).
double nbar_from_ground_fraction(double p0);

// Sympathetic cooling as a dissipative reset: the motional register is
// projected out (the cooling light continuously measures it), replaced by a
// fresh thermal sample at the given nbar, and the logic ion is pumped to
// its lowest level. Internal states of all other ions are untouched.
JointState cool_to_ground(const JointState& state, double nbar,
                          std::mt19937_64& rng);

// State-dependent optical-dipole force: conditioned on each internal level
// of the target ion, displaces the motion by the closed-form amplitude of a
// drive detuned from the mode, alpha = g/delta * (1 - exp(i delta t)) with
// g = V_level * eta / (2 hbar) (resonant limit |alpha| = g t). Internal
// populations are unchanged. Requires n_max >= |alpha|^2 +
// 6 sqrt(|alpha|^2 + 1) so the displaced wave packet fits the register.
JointState dipole_force_displacement(const JointState& state, int ion,
                                     const std::vector<double>& level_amp_J,
                                     double eta, double detuning_rad_s,
                                     double duration_s);

// --- repeated / adaptive readout -------------------------------------------

struct ReadoutRecord {
  std::vector<int> counts;               // photon count per round
  std::vector<VecX> posteriors;          // posterior after each round
  std::vector<std::string> state_trace;  // candidate truth before each round
  std::string decision;
  int rounds = 0;
  bool timed_out = false;
};

// Single-shot readout of a spectroscopy ion in "g" or "e" through the
// shared mode: ground-state cool, red-sideband pi on the spectroscopy ion
// (moves its excitation onto the motion), red-sideband pi on the logic ion
// (absorbs the quantum), fluorescence detection. Imperfections: residual
// thermal occupation after cooling and a common fractional error on both
// pulse angles.
struct SchmidtImperfections {
  double nbar_init = 0.0;
  double angle_error = 0.0;
};

struct SchmidtResult {
  std::string inferred; // "g" or "e"
  ReadoutRecord record;
  JointState final_state;
};

SchmidtResult run_schmidt_readout(const std::string& true_state,
                                  const SchmidtImperfections& imperfections,
                                  const DetectionModel& detection,
                                  std::mt19937_64& rng);

// Repeated non-demolition readout of a metastable candidate pair. Each
// round maps the candidate onto the logic ion (correctly with probability
// mapping_fidelity), detects, and updates the posterior with the matching
// two-component mixture likelihood
//   P(count | state) = f P(count | mapped level) + (1-f) P(count | other).
// Rounds repeat until max posterior >= p_des or max_rounds (timeout keeps
// the best guess and sets a flag). Between rounds the dark candidate decays
// to the bright one with probability round_duration / upper_lifetime.
struct QndModel {
  DetectionModel detection;     // [bright mean, dark mean]
  std::string bright_state = "S";
  std::string dark_state = "P0"; // metastable; decays toward bright_state
  double mapping_fidelity = 1.0;
  double p_des = 0.9998;
  int max_rounds = 100;
  double upper_lifetime_s = std::numeric_limits<double>::infinity();
  double round_duration_s = 0.0;
};

ReadoutRecord run_qnd_readout(const std::string& true_state,
                              const QndModel& model, std::mt19937_64& rng);

// --- entangled-state preparation -------------------------------------------

// Shares a single motional quantum between two logic ions: spectroscopy-ion
// blue-sideband pi adds the quantum, then a simultaneous two-ion red
// sideband with angle pi/sqrt(2) transfers it completely, leaving
// (|up down> + |down up>)/sqrt(2) (x) |0>. Returns the state and its overlap
// fidelity with that target.
struct DickeOptions {
  double eta = 0.1;                  // first logic ion's Lamb-Dicke factor
  double eta_imbalance = 0.0;        // second couples with eta*(1+imbalance)
  double intensity_noise_rms = 0.0;  // fractional angle noise per pulse
  double nbar_init = 0.0;
  int n_max = 10;
};

struct DickeResult {
  JointState state;
  double fidelity = 0.0;
  std::vector<std::string> warnings;
};

DickeResult run_dicke_preparation(const DickeOptions& options,
                                  std::mt19937_64& rng);

// --- irreversible population transfer ---------------------------------------

// Walks population up a ladder of sublevels, one rung per step: coherent
// carrier transfer to an auxiliary level, a motion-adding sideband onto the
// next rung, then sympathetic cooling to discard the quantum (which is what
// makes the step irreversible). Returns the ladder ion's level populations:
// entries 0..steps are the rungs (the last one is the target state),
// followed by the auxiliary levels.
VecX run_pumping_ladder(int steps, double pulse_angle_error,
                        std::mt19937_64& rng);

// --- frequency-comb bookkeeping ---------------------------------------------

// Raman difference frequencies reachable with comb line pairs:
// delta_n * omega_rep + omega_shift for delta_n = 0..delta_n_max. The comb
// offset frequency cancels in every difference.
VecX comb_raman_frequencies(double omega_rep, double omega_shift,
                            int delta_n_max);

} // namespace ionsim
