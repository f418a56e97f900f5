// Shared fixtures: the Be-Mg reference chain used across the test suite.
#pragma once

#include <array>
#include <random>
#include <vector>

#include <ionsim/constants.hpp>
#include <ionsim/trap.hpp>

namespace fixtures {

inline const ionsim::IonSpecies kBe{"Be", 9.0, 1};
inline const ionsim::IonSpecies kMg{"Mg", 24.0, 1};

// Single-ion secular frequencies defining the reference trap (MHz):
// Be [12.26, 11.19, 2.69], Mg [4.82, 3.72, 1.65].
inline const ionsim::Vec3 kBeFreqsHz{12.26e6, 11.19e6, 2.69e6};
inline const ionsim::Vec3 kMgFreqsHz{4.82e6, 3.72e6, 1.65e6};

inline ionsim::TrapModel reference_trap() {
  return ionsim::fit_trap_from_reference(kBe, kBeFreqsHz, kMg, kMgFreqsHz,
                                         ionsim::constants::two_pi * 100e6)
      .trap;
}

// Expected Be-Mg mode frequencies of the reference trap (MHz, descending)
// and the matching mass-weighted eigenvector magnitudes, ion-major
// (Be x,y,z then Mg x,y,z).
inline const std::array<double, 6> kReferenceModesMHz{12.11, 11.03, 4.68,
                                                      4.04, 3.53, 1.90};
inline const std::array<std::array<double, 6>, 6> kReferenceVectors{{
    {1.000, 0.0, 0.0, 0.018, 0.0, 0.0},
    {0.0, 1.000, 0.0, 0.0, 0.020, 0.0},
    {0.018, 0.0, 0.0, 1.000, 0.0, 0.0},
    {0.0, 0.0, 0.926, 0.0, 0.0, 0.378},
    {0.0, 0.020, 0.0, 0.0, 1.000, 0.0},
    {0.0, 0.0, 0.378, 0.0, 0.0, 0.926},
}};

// Expected modes with an additional 200 V/m static field along y
// (MHz, descending) and signed eigenvectors up to a global sign per mode.
inline const std::array<double, 6> kFieldModesMHz{12.11, 11.06, 4.67,
                                                  4.04, 3.42, 1.89};
inline const std::array<std::array<double, 6>, 6> kFieldVectors{{
    {1.000, 0.0, 0.0, 0.018, 0.0, 0.0},
    {0.0, -0.999, 0.024, 0.0, -0.016, -0.014},
    {0.018, 0.0, 0.0, -1.000, 0.0, 0.0},
    {0.0, -0.017, -0.817, 0.0, -0.470, 0.334},
    {0.0, -0.027, -0.450, 0.0, 0.882, 0.137},
    {0.0, -0.005, 0.360, 0.0, 0.038, 0.932},
}};

// Random stable two-to-four-ion chains for oracle sweeps. Axial single-ion
// frequencies stay below 3.5 MHz so ion spacings remain micrometer-scale
// (keeps finite-difference steps well-conditioned); radial frequencies sit
// well above axial so chains stay linear.
struct RandomChain {
  ionsim::TrapModel trap;
  std::vector<ionsim::IonSpecies> species;
};

inline RandomChain random_chain(std::mt19937_64& rng) {
  namespace k = ionsim::constants;
  std::uniform_int_distribution<int> ion_count(2, 4);
  std::uniform_real_distribution<double> mass(9.0, 36.0);
  std::uniform_real_distribution<double> axial(1.5e6, 3.5e6);
  std::uniform_real_distribution<double> radial(8e6, 14e6);
  std::uniform_real_distribution<double> split(1.02, 1.3);

  const int n = ion_count(rng);
  std::vector<ionsim::IonSpecies> species;
  const double m0 = mass(rng);
  for (int i = 0; i < n; ++i) {
    double m = std::min(4.0 * m0, std::max(m0 / 4.0, mass(rng)));
    species.push_back({"ion" + std::to_string(i), m, 1});
  }

  // Build the trap from the lightest ion's frequencies with a generic
  // RF/static mix, then keep only stable draws (the caller loops).
  double m_light = species[0].mass_amu;
  for (auto& s : species) m_light = std::min(m_light, s.mass_amu);
  ionsim::IonSpecies light{"light", m_light, 1};

  const double fz = axial(rng);
  const double fx = radial(rng);
  const double fy = fx * split(rng);
  const double m_kg = light.mass_kg();

  ionsim::TrapModel trap;
  trap.rf_drive = k::two_pi * 100e6;
  // Radial: mostly RF with a small (possibly negative) static part; axial:
  // purely static, so heavier ions are confined on all axes.
  std::uniform_real_distribution<double> rf_fraction(0.8, 1.0);
  const double w2x = std::pow(k::two_pi * fx, 2);
  const double w2y = std::pow(k::two_pi * fy, 2);
  const double w2z = std::pow(k::two_pi * fz, 2);
  const double rx = rf_fraction(rng), ry = rf_fraction(rng);
  trap.rf_coeff = ionsim::Vec3(rx * w2x * m_kg * m_kg, ry * w2y * m_kg * m_kg,
                               0.0);
  trap.static_coeff =
      ionsim::Vec3((1.0 - rx) * w2x * m_kg, (1.0 - ry) * w2y * m_kg,
                   w2z * m_kg);
  return {trap, species};
}

}  // namespace fixtures
