#pragma once

#include <string>
#include <vector>

#include "ionsim/chain.hpp"

namespace ionsim {

// Distinct left-to-right species orders of a multiset, i.e. permutations
// that differ in the sequence of names. Lexicographically sorted; the count
// is the multinomial coefficient of the name multiplicities.
std::vector<std::vector<IonSpecies>> enumerate_orders(
    std::vector<IonSpecies> species);

// Radial extent below which a configuration counts as a linear chain: two
// orders of magnitude below thermal wave-packet extents, three above the
// relaxation noise floor.
inline constexpr double kLinearThreshold = 1.0e-9; // m

enum class ConfigurationKind { linear, off_axis };

// Structural label of a relaxed configuration. Linear means every radial
// coordinate is below kLinearThreshold; only then is the species order
// along +z defined. Off-axis configurations carry a geometry tag:
// "diamond" when exactly two ions sit mirror-symmetrically off the axis at
// matching z, plain "off-axis" otherwise; linear ones are tagged "chain".
struct ConfigurationClass {
  ConfigurationKind kind = ConfigurationKind::linear;
  std::string order;    // e.g. "Be-Mg-Mg-Be"; empty when off-axis
  std::string geometry; // "chain", "diamond", or "off-axis"
};

ConfigurationClass classify(const ChainConfiguration& config);

// Piecewise-linear ramp of every trap coefficient through the given
// snapshots. Each segment is walked in `steps` equal interpolation steps
// (200 per segment when the list is left empty).
struct RampSchedule {
  std::vector<TrapModel> snapshots;
  std::vector<int> steps;

  static constexpr int kDefaultSteps = 200;

  int segment_steps(std::size_t segment) const {
    return steps.empty() ? kDefaultSteps
                         : steps[segment];
  }
  // Throws std::invalid_argument unless there are >= 2 snapshots and the
  // step list is empty or matches the segment count with all entries >= 1.
  void validate() const;
};

struct RampTrajectory {
  // One entry per interpolation step, preceded by the initial
  // configuration.
  std::vector<ChainConfiguration> configurations;
  ConfigurationClass final_class;
};

// Quasi-static continuation: at every interpolation step the chain is
// relaxed from the previous step's positions, following the local minimum
// as it moves. The initial configuration must be a converged equilibrium
// of the first snapshot. A relaxation failure (divergence past the escape
// radius or exhausted iterations) is rethrown as ContinuationError
// carrying the global step index.
RampTrajectory ramp_and_relax(const RampSchedule& schedule,
                              const std::vector<IonSpecies>& species,
                              const ChainConfiguration& initial,
                              const EquilibriumOptions& opts = {});

// Converged linear chain with the given left-to-right species order along
// +z, obtained by relaxing an equally spaced seed in that order. Throws
// AssumptionError if the relaxed configuration is not that linear order
// (e.g. the order is not a local minimum of this trap).
ChainConfiguration relax_linear_order(const TrapModel& trap,
                                      const std::vector<IonSpecies>& order);

// Smallest uniform-field magnitude along the given radial axis (0 = x,
// 1 = y) that radially aligns a two-ion chain: ramping the field from zero,
// the continued configuration's axial separation collapses below
// kLinearThreshold. Bisection to 1 V/m within [0, 5000] V/m; throws
// std::domain_error when no alignment happens in that range (e.g. an
// equal-mass pair, which the field displaces without differential force).
double critical_radial_field(const TrapModel& trap, const IonSpecies& first,
                             const IonSpecies& second, int axis);

struct AsymmetricReorderResult {
  std::string initial_order;
  std::string final_order;
  bool aligned = false;      // the pair reached radial alignment
  bool sub_critical = false; // field below critical: order left unchanged
  RampTrajectory trajectory;
};

// Deterministic two-ion reordering by symmetry breaking, as a four-phase
// ramp: apply a radial field along y (aligning the ions radially when
// above the critical field), switch on the y-z twist potential (tilting
// the aligned pair), remove the field (the tilt picks the landing order),
// remove the twist. The final order depends only on the twist sign, not on
// the starting order; flipping the sign of twist_coeff mirrors the result.
// A sub-critical field leaves the order unchanged and raises the flag.
AsymmetricReorderResult run_asymmetric_reorder(
    const TrapModel& trap, const std::vector<IonSpecies>& start_order,
    double field_v_m, double twist_coeff);

} // namespace ionsim
