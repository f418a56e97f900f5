#pragma once

#include <numbers>

// Physical constants, CODATA 2018. Everything in the library is SI; unit
// conversions happen once at interfaces (MHz, amu, um).
namespace ionsim::constants {

inline constexpr double pi = std::numbers::pi;

inline constexpr double hbar = 1.054571817e-34;              // J s
inline constexpr double epsilon0 = 8.8541878128e-12;         // F / m
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg

// Coulomb energy prefactor for a pair of unit charges: e^2 / (4 pi eps0), J m.
inline constexpr double unit_charge_coulomb =
    elementary_charge * elementary_charge / (4.0 * pi * epsilon0);

inline constexpr double two_pi = 2.0 * pi;

inline constexpr double mhz_to_rad_s = two_pi * 1.0e6;
inline constexpr double rad_s_to_mhz = 1.0 / mhz_to_rad_s;

} // namespace ionsim::constants
