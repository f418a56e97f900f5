#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/modes.hpp"

namespace ionsim {

// Travelling-wave (or Raman difference-beam) light field addressing one ion.
// For a Raman pair, `wavevector` is the difference wavevector and `detuning`
// the difference detuning of the two beams.
struct LaserField {
  Vec3 wavevector = Vec3::Zero();  // rad/m
  double rabi_frequency = 0.0;     // rad/s
  double detuning = 0.0;           // rad/s, negative = red
  double linewidth = 0.0;          // rad/s, must be > 0

  // Saturation parameter s = 2 |Omega|^2 / Gamma^2 (derived, never stored).
  double saturation() const {
    return 2.0 * rabi_frequency * rabi_frequency / (linewidth * linewidth);
  }
};

// Electric-field noise acting uniformly across the chain along `direction`.
// `spectral_density` maps angular frequency (rad/s) to S_E in (V/m)^2/Hz;
// it may be analytic or built from tabulated pairs via `tabulated_noise`.
struct FieldNoiseSpec {
  Vec3 direction = Vec3::UnitZ();  // unit vector
  std::function<double(double)> spectral_density;

  // S_E at omega; throws std::domain_error when the density is undefined
  // there and std::invalid_argument when it is negative.
  double sample(double omega) const;
};

// Linear interpolation through (omega, S_E) pairs; sampling outside the
// tabulated range is treated as undefined.
FieldNoiseSpec tabulated_noise(const Vec3& direction,
                               std::vector<std::array<double, 2>> points);

// Steady-state excited population rho_ee = (s/2) / (1 + s + (2 Delta/Gamma)^2)
// of the driven two-level cycling transition, in (0, 1/2).
double excited_population(const LaserField& laser);

// Analytic d rho_ee / d Delta at the laser's detuning.
double excited_population_slope(const LaserField& laser);

// Time-averaged scattering force F = hbar k Gamma rho_ee (N).
Vec3 radiation_pressure_force(const LaserField& laser);

// Doppler rate of mode `mode` (quanta/s) when the laser addresses ion `ion`
// only, at occupation n: -2 omega eta^2 (n + 1/2) Gamma drho/dDelta. The sign
// makes red detuning cool (negative rate) and blue detuning heat.
double doppler_rate(const NormalModeSet& modes, const LaserField& laser,
                    int ion, int mode, double n);

// Photon-recoil heating of the mode (quanta/s, >= 0):
// [eta^2 + (2/5) (hbar |k|^2 / (2 m_j omega)) |e'_j|^2] Gamma rho_ee.
// The first term is absorption recoil along k, the second spontaneous
// emission recoil with the dipole-pattern factor 2/5. Valid for s << 1.
double recoil_heating_rate(const NormalModeSet& modes, const LaserField& laser,
                           int ion, int mode);

// Occupation n_ss where Doppler cooling balances recoil heating; closed form
// since both rates are affine in n. Requires detuning < 0; throws
// std::domain_error when the balance has no solution with n_ss >= 0.
double doppler_equilibrium(const NormalModeSet& modes, const LaserField& laser,
                           int ion, int mode);

// Heating rate (quanta/s) of the mode from uniform electric-field noise:
// S_E(omega) / (4 hbar omega) * |sum_j q_j (u . e'_j) / sqrt(m_j)|^2.
// Exactly antisymmetric modes of homogeneous chains decouple completely.
double anomalous_heating_rate(const NormalModeSet& modes, int mode,
                              const FieldNoiseSpec& noise);

// Two-ion gate infidelity 1 - F = 0.3 pi^2 eta^4 n (n + 1) and the occupation
// that meets a target infidelity at fixed eta.
double gate_infidelity(double eta, double nbar);
double gate_nbar_for_infidelity(double eta, double target_infidelity);

// Thermal carrier Rabi reduction 1 - (1/2) sum_a eta_a^2 (2 n_a + 1) over the
// participating modes.
double carrier_rabi_factor(const VecX& eta, const VecX& n);

// Rate summary for one (ion, mode, laser) combination with the parameter
// echo and assumption notes that accompany serialized reports.
struct CoolingReport {
  int ion = 0;
  int mode = 0;
  double mode_frequency_hz = 0.0;
  double eta = 0.0;
  double saturation = 0.0;
  double detuning_over_linewidth = 0.0;
  double occupation = 0.0;        // n the rates were evaluated at
  double doppler_rate = 0.0;      // quanta/s
  double recoil_rate = 0.0;       // quanta/s
  double equilibrium_n = 0.0;     // NaN when no equilibrium exists
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

CoolingReport cooling_report(const NormalModeSet& modes,
                             const LaserField& laser, int ion, int mode,
                             double n);

} // namespace ionsim
