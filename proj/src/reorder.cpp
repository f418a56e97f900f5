#include "ionsim/reorder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

bool name_less(const IonSpecies& a, const IonSpecies& b) {
  return a.name < b.name;
}

std::vector<long> indices_by_z(const ChainConfiguration& config) {
  std::vector<long> order(config.species.size());
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    return config.positions[3 * a + 2] < config.positions[3 * b + 2];
  });
  return order;
}

std::string order_label(const ChainConfiguration& config) {
  std::string label;
  for (long j : indices_by_z(config)) {
    if (!label.empty())
      label += '-';
    label += config.species[j].name;
  }
  return label;
}

double radial_extent(const ChainConfiguration& config, long ion) {
  return std::max(std::abs(config.positions[3 * ion]),
                  std::abs(config.positions[3 * ion + 1]));
}

// Axial separation of a two-ion configuration.
double axial_gap(const ChainConfiguration& config) {
  return std::abs(config.positions[2] - config.positions[5]);
}

} // namespace

std::vector<std::vector<IonSpecies>> enumerate_orders(
    std::vector<IonSpecies> species) {
  if (species.empty())
    throw std::invalid_argument("enumerate_orders: empty species list");
  std::sort(species.begin(), species.end(), name_less);
  std::vector<std::vector<IonSpecies>> orders;
  do {
    orders.push_back(species);
  } while (std::next_permutation(species.begin(), species.end(), name_less));
  return orders;
}

ConfigurationClass classify(const ChainConfiguration& config) {
  const long n = static_cast<long>(config.species.size());
  if (n == 0 || config.positions.size() != 3 * n)
    throw std::invalid_argument("classify: malformed configuration");

  std::vector<long> off_axis;
  for (long j = 0; j < n; ++j)
    if (radial_extent(config, j) >= kLinearThreshold)
      off_axis.push_back(j);

  ConfigurationClass result;
  if (off_axis.empty()) {
    result.kind = ConfigurationKind::linear;
    result.order = order_label(config);
    result.geometry = "chain";
    return result;
  }

  result.kind = ConfigurationKind::off_axis;
  result.geometry = "off-axis";
  if (off_axis.size() == 2) {
    const auto a = config.positions.segment<3>(3 * off_axis[0]);
    const auto b = config.positions.segment<3>(3 * off_axis[1]);
    const bool mirrored = std::abs(a[0] + b[0]) < kLinearThreshold &&
                          std::abs(a[1] + b[1]) < kLinearThreshold &&
                          std::abs(a[2] - b[2]) < kLinearThreshold;
    if (mirrored)
      result.geometry = "diamond";
  }
  return result;
}

void RampSchedule::validate() const {
  if (snapshots.size() < 2)
    throw std::invalid_argument("ramp schedule needs at least two snapshots");
  if (!steps.empty() && steps.size() != snapshots.size() - 1)
    throw std::invalid_argument(
        "ramp schedule needs one step count per segment");
  for (int s : steps)
    if (s < 1)
      throw std::invalid_argument("ramp step counts must be at least 1");
}

RampTrajectory ramp_and_relax(const RampSchedule& schedule,
                              const std::vector<IonSpecies>& species,
                              const ChainConfiguration& initial,
                              const EquilibriumOptions& opts) {
  schedule.validate();
  if (species.empty())
    throw std::invalid_argument("ramp_and_relax: empty species list");
  if (initial.positions.size() != 3 * static_cast<long>(species.size()))
    throw std::invalid_argument(
        "ramp_and_relax: configuration does not match the species list");
  if (!initial.converged)
    throw std::invalid_argument(
        "ramp_and_relax: initial configuration is not converged");
  const double stationarity =
      chain_gradient(schedule.snapshots.front(), species, initial.positions)
          .norm();
  if (stationarity >
      1.0e3 * opts.gradient_tol_per_ion * static_cast<double>(species.size()))
    throw std::invalid_argument(
        "ramp_and_relax: initial configuration is not an equilibrium of the "
        "first snapshot");

  RampTrajectory trajectory;
  trajectory.configurations.push_back(initial);

  long global_step = 0;
  for (std::size_t segment = 0; segment + 1 < schedule.snapshots.size();
       ++segment) {
    const int steps = schedule.segment_steps(segment);
    for (int k = 1; k <= steps; ++k) {
      ++global_step;
      const TrapModel trap =
          lerp(schedule.snapshots[segment], schedule.snapshots[segment + 1],
               static_cast<double>(k) / steps);
      try {
        trajectory.configurations.push_back(
            relax(trap, species,
                  trajectory.configurations.back().positions, opts));
      } catch (const ConvergenceError& failure) {
        throw ContinuationError(
            std::string("quasi-static continuation failed: ") +
                failure.what(),
            global_step);
      }
    }
  }

  trajectory.final_class = classify(trajectory.configurations.back());
  return trajectory;
}

ChainConfiguration relax_linear_order(const TrapModel& trap,
                                      const std::vector<IonSpecies>& order) {
  if (order.empty())
    throw std::invalid_argument("relax_linear_order: empty species list");
  const ChainConfiguration config =
      relax(trap, order, default_seed_positions(trap, order));
  const ConfigurationClass cls = classify(config);

  std::string requested;
  for (const IonSpecies& species : order) {
    if (!requested.empty())
      requested += '-';
    requested += species.name;
  }
  if (cls.kind != ConfigurationKind::linear || cls.order != requested)
    throw AssumptionError("the order " + requested +
                          " is not a linear equilibrium of this trap");
  return config;
}

namespace {

// Continued two-ion configuration with the field ramped from zero to
// `field` along `axis`; reports whether the axial separation collapsed.
bool aligns_radially(const TrapModel& trap,
                     const std::vector<IonSpecies>& pair,
                     const ChainConfiguration& start, int axis,
                     double field) {
  TrapModel pushed = trap;
  pushed.uniform_field[axis] += field;
  RampSchedule schedule;
  schedule.snapshots = {trap, pushed};
  const RampTrajectory trajectory = ramp_and_relax(schedule, pair, start);
  return axial_gap(trajectory.configurations.back()) < kLinearThreshold;
}

} // namespace

double critical_radial_field(const TrapModel& trap, const IonSpecies& first,
                             const IonSpecies& second, int axis) {
  if (axis != 0 && axis != 1)
    throw std::invalid_argument(
        "critical_radial_field: axis must be radial (0 or 1)");

  const std::vector<IonSpecies> pair{first, second};
  const ChainConfiguration start = find_equilibrium(trap, pair);

  constexpr double kMaxField = 5000.0; // V/m
  constexpr double kTolerance = 1.0;   // V/m

  if (!aligns_radially(trap, pair, start, axis, kMaxField))
    throw std::domain_error(
        "no radial alignment below 5000 V/m on this axis; the pair keeps "
        "its axial order (equal masses are displaced without differential "
        "force)");

  double lo = 0.0;
  double hi = kMaxField;
  while (hi - lo > kTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (aligns_radially(trap, pair, start, axis, mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

AsymmetricReorderResult run_asymmetric_reorder(
    const TrapModel& trap, const std::vector<IonSpecies>& start_order,
    double field_v_m, double twist_coeff) {
  if (start_order.size() != 2)
    throw std::invalid_argument(
        "run_asymmetric_reorder: needs a two-ion species order");
  if (!(field_v_m >= 0.0) || !std::isfinite(field_v_m))
    throw std::invalid_argument(
        "run_asymmetric_reorder: field must be finite and non-negative");
  if (twist_coeff == 0.0 || !std::isfinite(twist_coeff))
    throw std::invalid_argument(
        "run_asymmetric_reorder: twist coefficient must be finite and "
        "nonzero");

  TrapModel with_field = trap;
  with_field.uniform_field[1] += field_v_m;
  TrapModel with_both = with_field;
  with_both.twist_coeff += twist_coeff;
  TrapModel with_twist = trap;
  with_twist.twist_coeff += twist_coeff;

  RampSchedule schedule;
  schedule.snapshots = {trap, with_field, with_both, with_twist, trap};

  AsymmetricReorderResult result;
  const ChainConfiguration start = relax_linear_order(trap, start_order);
  result.initial_order = classify(start).order;
  result.trajectory = ramp_and_relax(schedule, start_order, start);

  for (const ChainConfiguration& step : result.trajectory.configurations)
    if (axial_gap(step) < kLinearThreshold) {
      result.aligned = true;
      break;
    }
  result.sub_critical = !result.aligned;
  result.final_order = result.trajectory.final_class.order;
  return result;
}

} // namespace ionsim
