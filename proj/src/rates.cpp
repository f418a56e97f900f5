#include "ionsim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

namespace k = constants;

void require_positive_linewidth(const LaserField& laser) {
  if (!(laser.linewidth > 0.0))
    throw std::invalid_argument("laser linewidth must be positive");
}

// Validates (ion, mode) and rejects unstable modes, whose occupation-rate
// language is meaningless.
void require_stable_mode(const NormalModeSet& modes, int ion, int mode) {
  const int n_modes = static_cast<int>(modes.frequencies.size());
  const int n_ions = static_cast<int>(modes.config.species.size());
  if (mode < 0 || mode >= n_modes)
    throw std::out_of_range("mode index out of range");
  if (ion < 0 || ion >= n_ions)
    throw std::out_of_range("ion index out of range");
  if (!modes.stable[mode]) {
    std::ostringstream msg;
    msg << "mode " << mode << " has negative curvature; no rates are defined";
    throw InstabilityError(msg.str(), -1);
  }
}

std::string format_quantity(double value) {
  std::ostringstream out;
  out.precision(3);
  out << value;
  return out.str();
}

} // namespace

double FieldNoiseSpec::sample(double omega) const {
  if (!spectral_density)
    throw std::domain_error("field noise spectral density is undefined");
  const double s = spectral_density(omega);
  if (std::isnan(s))
    throw std::domain_error(
        "field noise spectral density is undefined at the requested "
        "frequency");
  if (s < 0.0)
    throw std::invalid_argument("field noise spectral density is negative");
  return s;
}

FieldNoiseSpec tabulated_noise(const Vec3& direction,
                               std::vector<std::array<double, 2>> points) {
  if (points.size() < 2)
    throw std::invalid_argument(
        "tabulated noise needs at least two (omega, S_E) points");
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  FieldNoiseSpec spec;
  spec.direction = direction;
  spec.spectral_density = [table = std::move(points)](double omega) {
    if (omega < table.front()[0] || omega > table.back()[0])
      return std::numeric_limits<double>::quiet_NaN();  // undefined
    auto hi = std::lower_bound(
        table.begin(), table.end(), omega,
        [](const auto& p, double w) { return p[0] < w; });
    if (hi == table.begin()) return (*hi)[1];
    auto lo = hi - 1;
    const double t = ((*hi)[0] == (*lo)[0])
                         ? 0.0
                         : (omega - (*lo)[0]) / ((*hi)[0] - (*lo)[0]);
    return (*lo)[1] + t * ((*hi)[1] - (*lo)[1]);
  };
  return spec;
}

double excited_population(const LaserField& laser) {
  require_positive_linewidth(laser);
  const double s = laser.saturation();
  const double d = 2.0 * laser.detuning / laser.linewidth;
  return (s / 2.0) / (1.0 + s + d * d);
}

double excited_population_slope(const LaserField& laser) {
  require_positive_linewidth(laser);
  const double s = laser.saturation();
  const double g = laser.linewidth;
  const double d = 2.0 * laser.detuning / g;
  const double denom = 1.0 + s + d * d;
  return -4.0 * s * laser.detuning / (g * g * denom * denom);
}

Vec3 radiation_pressure_force(const LaserField& laser) {
  return k::hbar * laser.wavevector * laser.linewidth *
         excited_population(laser);
}

double doppler_rate(const NormalModeSet& modes, const LaserField& laser,
                    int ion, int mode, double n) {
  require_stable_mode(modes, ion, mode);
  const double omega = modes.frequencies[mode];
  const double eta = lamb_dicke(modes, laser.wavevector, ion, mode);
  return -2.0 * omega * eta * eta * (n + 0.5) * laser.linewidth *
         excited_population_slope(laser);
}

double recoil_heating_rate(const NormalModeSet& modes, const LaserField& laser,
                           int ion, int mode) {
  require_stable_mode(modes, ion, mode);
  const double omega = modes.frequencies[mode];
  const double eta = lamb_dicke(modes, laser.wavevector, ion, mode);
  const double m = modes.config.species[static_cast<std::size_t>(ion)].mass_kg();
  const double recoil_scale =
      k::hbar * laser.wavevector.squaredNorm() / (2.0 * m * omega);
  const double participation = modes.ion_component(ion, mode).squaredNorm();
  return (eta * eta + 0.4 * recoil_scale * participation) * laser.linewidth *
         excited_population(laser);
}

double doppler_equilibrium(const NormalModeSet& modes, const LaserField& laser,
                           int ion, int mode) {
  require_stable_mode(modes, ion, mode);
  if (!(laser.detuning < 0.0))
    throw std::invalid_argument(
        "doppler equilibrium requires red detuning (detuning < 0)");
  // Both rates are affine in n: cooling = -c (n + 1/2), heating = r.
  const double omega = modes.frequencies[mode];
  const double eta = lamb_dicke(modes, laser.wavevector, ion, mode);
  const double c = 2.0 * omega * eta * eta * laser.linewidth *
                   excited_population_slope(laser);
  const double r = recoil_heating_rate(modes, laser, ion, mode);
  if (!(c > 0.0))
    throw std::domain_error(
        "the addressed ion does not couple to the mode along k; no Doppler "
        "equilibrium exists");
  const double nbar = r / c - 0.5;
  if (nbar < 0.0)
    throw std::domain_error(
        "rate balance has no non-negative equilibrium occupation");
  return nbar;
}

double anomalous_heating_rate(const NormalModeSet& modes, int mode,
                              const FieldNoiseSpec& noise) {
  const int n_modes = static_cast<int>(modes.frequencies.size());
  if (mode < 0 || mode >= n_modes)
    throw std::out_of_range("mode index out of range");
  if (!modes.stable[mode])
    throw InstabilityError("unstable mode has no heating rate", -1);
  if (std::abs(noise.direction.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("noise direction must be a unit vector");
  const double omega = modes.frequencies[mode];
  const double s_e = noise.sample(omega);
  double projection = 0.0;
  for (std::size_t j = 0; j < modes.config.species.size(); ++j)
    projection += modes.config.species[j].charge_C() *
                  noise.direction.dot(modes.ion_component(static_cast<int>(j),
                                                           mode)) /
                  std::sqrt(modes.config.species[j].mass_kg());
  return s_e * projection * projection / (4.0 * k::hbar * omega);
}

double gate_infidelity(double eta, double nbar) {
  if (eta < 0.0 || nbar < 0.0)
    throw std::invalid_argument("eta and nbar must be non-negative");
  return 0.3 * k::pi * k::pi * std::pow(eta, 4) * nbar * (nbar + 1.0);
}

double gate_nbar_for_infidelity(double eta, double target_infidelity) {
  if (!(eta > 0.0) || target_infidelity < 0.0)
    throw std::invalid_argument(
        "eta must be positive and the target infidelity non-negative");
  const double c = target_infidelity / (0.3 * k::pi * k::pi * std::pow(eta, 4));
  return 0.5 * (std::sqrt(1.0 + 4.0 * c) - 1.0);
}

double carrier_rabi_factor(const VecX& eta, const VecX& n) {
  if (eta.size() != n.size())
    throw std::invalid_argument(
        "carrier factor needs one occupation per Lamb-Dicke parameter");
  double sum = 0.0;
  for (Eigen::Index a = 0; a < eta.size(); ++a)
    sum += eta[a] * eta[a] * (2.0 * n[a] + 1.0);
  return 1.0 - 0.5 * sum;
}

CoolingReport cooling_report(const NormalModeSet& modes,
                             const LaserField& laser, int ion, int mode,
                             double n) {
  CoolingReport report;
  report.ion = ion;
  report.mode = mode;
  report.mode_frequency_hz = modes.frequency_hz(mode);
  report.eta = lamb_dicke(modes, laser.wavevector, ion, mode);
  report.saturation = laser.saturation();
  report.detuning_over_linewidth = laser.detuning / laser.linewidth;
  report.occupation = n;
  report.doppler_rate = doppler_rate(modes, laser, ion, mode, n);
  report.recoil_rate = recoil_heating_rate(modes, laser, ion, mode);

  const double omega = modes.frequencies[mode];
  if (laser.linewidth < omega)
    report.warnings.push_back(
        "linewidth below the mode frequency: the weak-binding rate "
        "equations do not apply (ratio " +
        format_quantity(laser.linewidth / omega) + ")");
  else if (laser.linewidth < 5.0 * omega)
    report.warnings.push_back(
        "linewidth less than five times the mode frequency; rate-equation "
        "accuracy degrades (ratio " +
        format_quantity(laser.linewidth / omega) + ")");
  const double ld_validity = report.eta * report.eta * (2.0 * n + 1.0);
  if (ld_validity >= 1.0)
    report.warnings.push_back("outside the Lamb-Dicke regime: eta^2 (2n+1) = " +
                              format_quantity(ld_validity));
  report.notes.push_back("recoil term assumes low saturation (s = " +
                         format_quantity(report.saturation) + ")");

  if (laser.detuning < 0.0) {
    try {
      report.equilibrium_n = doppler_equilibrium(modes, laser, ion, mode);
    } catch (const std::domain_error& err) {
      report.equilibrium_n = std::numeric_limits<double>::quiet_NaN();
      report.warnings.emplace_back(err.what());
    }
  } else {
    report.equilibrium_n = std::numeric_limits<double>::quiet_NaN();
    report.warnings.push_back(
        "no Doppler equilibrium at non-negative detuning");
  }
  return report;
}

} // namespace ionsim
