#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/species.hpp"

namespace ionsim {

using Vec3 = Eigen::Vector3d;

// Mass-dependent harmonic trap. Per axis the squared secular frequency of a
// singly charged ion of mass m is
//
//   omega_i^2(m) = a_i / m^2 + b_i / m
//
// with a_i the ponderomotive coefficient ((rad/s)^2 kg^2) and b_i the static
// coefficient ((rad/s)^2 kg). For charge Z the ponderomotive term scales as
// Z^2 and the static term as Z. Optional perturbations:
//
//   uniform_field E      potential energy q E . r            (V/m)
//   axial_gradient G     force -(m_ref/m) Z^2 G zhat         (J/m)
//   cubic_scale lambda3  energy Z c3 z^3 with
//                        c3 = (a_z/m_ref + b_z) / (2 lambda3) (m)
//   twist_coeff c_t      energy q c_t y z                    (V/m^2)
struct TrapModel {
  Vec3 rf_coeff = Vec3::Zero();     // a_i, (rad/s)^2 kg^2
  Vec3 static_coeff = Vec3::Zero(); // b_i, (rad/s)^2 kg
  double rf_drive = 0.0;            // Omega_RF, rad/s

  Vec3 uniform_field = Vec3::Zero(); // V/m
  double axial_gradient = 0.0;       // J/m, referenced to reference_mass
  double reference_mass = 0.0;       // kg; required when gradient or cubic set
  std::optional<double> cubic_scale; // lambda3, m
  double twist_coeff = 0.0;          // V/m^2
};

// Squared secular frequencies per axis in (rad/s)^2; may be negative.
Vec3 secular_omega_sq(const TrapModel& trap, const IonSpecies& species);

// Secular frequencies per axis in Hz. Throws InstabilityError naming the
// first axis whose total curvature is not positive.
Vec3 secular_frequencies_hz(const TrapModel& trap, const IonSpecies& species);

struct AxisStability {
  double frequency_hz = 0.0; // sqrt(|omega^2|)/2pi
  double bound_hz = 0.0;     // Omega_RF / (2 sqrt(2)) / 2pi
  double margin_hz = 0.0;    // bound - frequency
  bool positive_curvature = false;
  bool within_bound = false;
};

struct StabilityReport {
  std::array<AxisStability, 3> axes;
  bool pass = false;
};

// Adiabatic stability: omega_i <= Omega_RF / (2 sqrt(2)) and omega_i^2 > 0
// on every axis. The boundary case counts as stable with zero margin.
StabilityReport stability_check(const TrapModel& trap,
                                const IonSpecies& species);

struct TrapFit {
  TrapModel trap;
  std::vector<std::string> warnings;
};

// Recover (a_i, b_i) from the secular frequencies (Hz) of two reference
// species of different mass. A slightly negative fitted a_i with
// |a_i|/(m^2 omega^2) < 1e-2 for both references is treated as fit noise:
// a_i is clamped to zero and b_i refit by least squares, with a warning.
// A larger negative a_i throws std::invalid_argument.
TrapFit fit_trap_from_reference(const IonSpecies& species_a,
                                const Vec3& freqs_a_hz,
                                const IonSpecies& species_b,
                                const Vec3& freqs_b_hz, double rf_drive);

// Copy of `trap` whose static coefficients are retuned so that `species`
// has the given secular frequencies (Hz); the RF coefficients are kept.
TrapModel with_static_retuned(const TrapModel& trap, const IonSpecies& species,
                              const Vec3& freqs_hz);

// Coefficient of the axial cubic energy term, J/m^3 (zero when unset).
double cubic_coefficient(const TrapModel& trap);

// Linear interpolation of every coefficient; the cubic term interpolates as
// 1/lambda3 (the coefficient that actually multiplies z^3). Both endpoints
// must agree on reference_mass when either uses it.
TrapModel lerp(const TrapModel& a, const TrapModel& b, double t);

} // namespace ionsim
