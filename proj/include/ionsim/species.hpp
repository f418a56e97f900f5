#pragma once

#include <stdexcept>
#include <string>

#include "ionsim/constants.hpp"

namespace ionsim {

// An ion species: label, mass in atomic mass units, charge in units of e.
struct IonSpecies {
  std::string name;
  double mass_amu = 0.0;
  int charge = 1;

  IonSpecies() = default;
  IonSpecies(std::string name_, double mass_amu_, int charge_ = 1)
      : name(std::move(name_)), mass_amu(mass_amu_), charge(charge_) {
    if (!(mass_amu > 0.0))
      throw std::invalid_argument("ion species '" + name +
                                  "': mass must be positive");
    if (charge < 1)
      throw std::invalid_argument("ion species '" + name +
                                  "': charge must be a positive integer");
  }

  double mass_kg() const { return mass_amu * constants::atomic_mass_unit; }
  double charge_C() const { return charge * constants::elementary_charge; }

  friend bool operator==(const IonSpecies& a, const IonSpecies& b) {
    return a.name == b.name && a.mass_amu == b.mass_amu &&
           a.charge == b.charge;
  }
};

} // namespace ionsim
