#include "ionsim/trap.hpp"

#include <cmath>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

namespace {
constexpr const char* kAxisNames[3] = {"x", "y", "z"};
}

Vec3 secular_omega_sq(const TrapModel& trap, const IonSpecies& species) {
  const double m = species.mass_kg();
  const double z = static_cast<double>(species.charge);
  Vec3 w2;
  for (int i = 0; i < 3; ++i)
    w2[i] = z * z * trap.rf_coeff[i] / (m * m) +
            z * trap.static_coeff[i] / m;
  return w2;
}

Vec3 secular_frequencies_hz(const TrapModel& trap, const IonSpecies& species) {
  const Vec3 w2 = secular_omega_sq(trap, species);
  for (int i = 0; i < 3; ++i) {
    if (!(w2[i] > 0.0))
      throw InstabilityError("trap unstable for species '" + species.name +
                                 "' on axis " + kAxisNames[i] +
                                 ": total omega^2 <= 0",
                             i);
  }
  Vec3 f;
  for (int i = 0; i < 3; ++i)
    f[i] = std::sqrt(w2[i]) / constants::two_pi;
  return f;
}

StabilityReport stability_check(const TrapModel& trap,
                                const IonSpecies& species) {
  if (!(trap.rf_drive > 0.0))
    throw std::invalid_argument("stability_check: rf_drive must be positive");
  const Vec3 w2 = secular_omega_sq(trap, species);
  const double bound_hz =
      trap.rf_drive / (2.0 * std::sqrt(2.0)) / constants::two_pi;

  StabilityReport report;
  report.pass = true;
  for (int i = 0; i < 3; ++i) {
    AxisStability& ax = report.axes[i];
    ax.positive_curvature = w2[i] > 0.0;
    ax.frequency_hz = std::sqrt(std::abs(w2[i])) / constants::two_pi;
    ax.bound_hz = bound_hz;
    ax.margin_hz = bound_hz - ax.frequency_hz;
    ax.within_bound = ax.frequency_hz <= bound_hz;
    if (!ax.positive_curvature || !ax.within_bound)
      report.pass = false;
  }
  return report;
}

TrapFit fit_trap_from_reference(const IonSpecies& species_a,
                                const Vec3& freqs_a_hz,
                                const IonSpecies& species_b,
                                const Vec3& freqs_b_hz, double rf_drive) {
  const double ma = species_a.mass_kg();
  const double mb = species_b.mass_kg();
  const double za = static_cast<double>(species_a.charge);
  const double zb = static_cast<double>(species_b.charge);
  if (ma == mb && za == zb)
    throw std::invalid_argument(
        "fit_trap_from_reference: reference species are degenerate (equal "
        "mass and charge)");
  if (!(rf_drive > 0.0))
    throw std::invalid_argument(
        "fit_trap_from_reference: rf_drive must be positive");

  TrapFit fit;
  fit.trap.rf_drive = rf_drive;
  for (int i = 0; i < 3; ++i) {
    if (!(freqs_a_hz[i] > 0.0) || !(freqs_b_hz[i] > 0.0))
      throw std::invalid_argument(
          "fit_trap_from_reference: reference frequencies must be positive");
    const double wa2 = std::pow(constants::two_pi * freqs_a_hz[i], 2);
    const double wb2 = std::pow(constants::two_pi * freqs_b_hz[i], 2);

    // wa2 = ca_a a + cb_a b with ca = Z^2/m^2, cb = Z/m; solve the 2x2.
    const double caa = za * za / (ma * ma), cba = za / ma;
    const double cab = zb * zb / (mb * mb), cbb = zb / mb;
    const double det = caa * cbb - cab * cba;
    if (det == 0.0)
      throw std::invalid_argument(
          "fit_trap_from_reference: reference system is singular");
    double a = (wa2 * cbb - wb2 * cba) / det;
    double b = (caa * wb2 - cab * wa2) / det;

    const double rel = std::max(std::abs(a) * caa / wa2,
                                std::abs(a) * cab / wb2);
    if (rel < 1.0e-12) {
      a = 0.0; // roundoff from exactly static inputs, not fit noise
    } else if (a < 0.0) {
      if (rel < 1.0e-2) {
        // Fit noise at the printed-precision level; drop the ponderomotive
        // term and refit the static coefficient by least squares.
        b = (wa2 * cba + wb2 * cbb) / (cba * cba + cbb * cbb);
        a = 0.0;
        fit.warnings.push_back(
            std::string("axis ") + kAxisNames[i] +
            ": negative ponderomotive coefficient within fit noise; clamped "
            "to zero and static coefficient refit");
      } else {
        throw std::invalid_argument(
            std::string("fit_trap_from_reference: axis ") + kAxisNames[i] +
            ": reference frequencies are inconsistent (ponderomotive "
            "coefficient significantly negative)");
      }
    }
    fit.trap.rf_coeff[i] = a;
    fit.trap.static_coeff[i] = b;
  }
  return fit;
}

TrapModel with_static_retuned(const TrapModel& trap, const IonSpecies& species,
                              const Vec3& freqs_hz) {
  const double m = species.mass_kg();
  const double z = static_cast<double>(species.charge);
  TrapModel out = trap;
  for (int i = 0; i < 3; ++i) {
    const double w2 = std::pow(constants::two_pi * freqs_hz[i], 2);
    out.static_coeff[i] = (w2 - z * z * trap.rf_coeff[i] / (m * m)) * m / z;
  }
  return out;
}

double cubic_coefficient(const TrapModel& trap) {
  if (!trap.cubic_scale)
    return 0.0;
  if (!(trap.reference_mass > 0.0))
    throw std::invalid_argument(
        "cubic term requires a positive reference_mass");
  if (!(*trap.cubic_scale != 0.0))
    throw std::invalid_argument("cubic_scale must be nonzero");
  // m_ref omega_s^2 / 2 / lambda3 for the reference mass at unit charge.
  const double m_ref_w2 =
      trap.rf_coeff[2] / trap.reference_mass + trap.static_coeff[2];
  return m_ref_w2 / (2.0 * *trap.cubic_scale);
}

TrapModel lerp(const TrapModel& a, const TrapModel& b, double t) {
  const bool a_ref = a.axial_gradient != 0.0 || a.cubic_scale.has_value();
  const bool b_ref = b.axial_gradient != 0.0 || b.cubic_scale.has_value();
  if (a_ref && b_ref && a.reference_mass != b.reference_mass)
    throw std::invalid_argument(
        "lerp: trap snapshots disagree on reference_mass");

  const double s = 1.0 - t;
  TrapModel out;
  out.rf_coeff = s * a.rf_coeff + t * b.rf_coeff;
  out.static_coeff = s * a.static_coeff + t * b.static_coeff;
  out.rf_drive = s * a.rf_drive + t * b.rf_drive;
  out.uniform_field = s * a.uniform_field + t * b.uniform_field;
  out.axial_gradient = s * a.axial_gradient + t * b.axial_gradient;
  out.reference_mass = a_ref ? a.reference_mass
                             : (b_ref ? b.reference_mass
                                      : std::max(a.reference_mass,
                                                 b.reference_mass));
  out.twist_coeff = s * a.twist_coeff + t * b.twist_coeff;

  const double inv_a = a.cubic_scale ? 1.0 / *a.cubic_scale : 0.0;
  const double inv_b = b.cubic_scale ? 1.0 / *b.cubic_scale : 0.0;
  const double inv = s * inv_a + t * inv_b;
  if (inv != 0.0)
    out.cubic_scale = 1.0 / inv;
  return out;
}

} // namespace ionsim
