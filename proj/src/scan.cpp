#include "ionsim/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

TrapModel with_field(const TrapModel& trap, int axis, double value) {
  TrapModel t = trap;
  t.uniform_field[axis] += value;
  return t;
}

// Greedy maximum-|overlap| assignment of previous-point branch vectors to
// the columns of the current eigenvector matrix.
std::vector<int> match_branches(const MatX& prev, const MatX& curr) {
  const int n = static_cast<int>(prev.cols());
  std::vector<std::tuple<double, int, int>> pairs;  // (|overlap|, branch, col)
  pairs.reserve(static_cast<std::size_t>(n) * n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c)
      pairs.emplace_back(std::abs(prev.col(b).dot(curr.col(c))), b, c);
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& x, const auto& y) {
              return std::get<0>(x) > std::get<0>(y);
            });
  std::vector<int> assignment(n, -1);
  std::vector<bool> used(n, false);
  int placed = 0;
  for (const auto& [overlap, b, c] : pairs) {
    (void)overlap;
    if (assignment[b] >= 0 || used[c]) continue;
    assignment[b] = c;
    used[c] = true;
    if (++placed == n) break;
  }
  return assignment;
}

// Index of the out-of-phase branch: the lowest-frequency mode whose motion
// is dominantly along `axis`. For a two-ion chain this is the relative-
// motion radial mode (transverse Coulomb coupling softens it below the
// common mode).
int oop_branch_index(const NormalModeSet& modes, int axis) {
  const int n = static_cast<int>(modes.frequencies.size());
  for (int m = 0; m < n; ++m) {
    double along = 0.0, total = 0.0;
    for (std::size_t j = 0; j < modes.config.species.size(); ++j) {
      const Vec3 e = modes.ion_component(static_cast<int>(j), m);
      along += e[axis] * e[axis];
      total += e.squaredNorm();
    }
    if (along > 0.5 * total) return m;  // ascending order: first hit is lowest
  }
  throw std::domain_error("no mode is dominantly along the scanned axis");
}

} // namespace

ModeScanResult scan_field(const TrapModel& trap,
                          const std::vector<IonSpecies>& species, int axis,
                          const VecX& field_values) {
  if (axis < 0 || axis > 2) throw std::out_of_range("axis must be 0, 1 or 2");
  if (field_values.size() < 1)
    throw std::invalid_argument("field grid is empty");
  for (Eigen::Index i = 1; i + 1 < field_values.size(); ++i) {
    const bool up = field_values[1] > field_values[0];
    if ((field_values[i + 1] > field_values[i]) != up)
      throw std::invalid_argument("field grid must be monotone");
  }

  ModeScanResult result;
  result.axis = axis;
  result.field_values = field_values;
  result.points.reserve(static_cast<std::size_t>(field_values.size()));
  for (Eigen::Index i = 0; i < field_values.size(); ++i) {
    try {
      result.points.push_back(
          solve_modes(with_field(trap, axis, field_values[i]), species));
    } catch (const std::exception& err) {
      result.failed_index = static_cast<int>(i);
      result.failure = err.what();
      break;
    }
  }
  result.complete =
      result.points.size() == static_cast<std::size_t>(field_values.size());

  // Sequential identity-tracking post-pass.
  const int completed = static_cast<int>(result.points.size());
  if (completed > 0) {
    const int n_modes = static_cast<int>(result.points[0].frequencies.size());
    result.branch_frequency_hz.resize(completed, n_modes);
    result.branch_mode_index.resize(static_cast<std::size_t>(completed));
    std::vector<int> columns(static_cast<std::size_t>(n_modes));
    std::iota(columns.begin(), columns.end(), 0);
    MatX tracked = result.points[0].eigenvectors;
    for (int i = 0; i < completed; ++i) {
      if (i > 0) {
        const std::vector<int> match =
            match_branches(tracked, result.points[i].eigenvectors);
        for (int b = 0; b < n_modes; ++b) {
          columns[static_cast<std::size_t>(b)] = match[static_cast<std::size_t>(b)];
          tracked.col(b) = result.points[i].eigenvectors.col(match[b]);
        }
      }
      result.branch_mode_index[static_cast<std::size_t>(i)] = columns;
      for (int b = 0; b < n_modes; ++b)
        result.branch_frequency_hz(i, b) =
            result.points[i].frequency_hz(columns[static_cast<std::size_t>(b)]);
    }
  }
  return result;
}

CompensationResult compensate_stray_field(
    const TrapModel& trap, const std::vector<IonSpecies>& species, int axis,
    double scan_min, double scan_max, int coarse_points, double tolerance) {
  if (!(scan_max > scan_min) || coarse_points < 5)
    throw std::invalid_argument(
        "compensation needs an ordered range and at least five coarse points");
  VecX grid(coarse_points);
  for (int i = 0; i < coarse_points; ++i)
    grid[i] = scan_min + (scan_max - scan_min) * i / (coarse_points - 1);

  ModeScanResult coarse = scan_field(trap, species, axis, grid);
  if (!coarse.complete)
    throw std::domain_error("coarse compensation scan failed at field " +
                            std::to_string(grid[coarse.failed_index]) +
                            " V/m: " + coarse.failure);

  const int branch = oop_branch_index(coarse.points.front(), axis);
  const VecX freq = coarse.branch_frequency_hz.col(branch);

  // Interior stationary point; its type (minimum or maximum of frequency)
  // follows from the neighbours.
  int best = -1;
  bool minimum = true;
  for (int i = 1; i + 1 < coarse_points; ++i) {
    if (freq[i] < freq[i - 1] && freq[i] < freq[i + 1]) {
      best = i;
      minimum = true;
      break;
    }
    if (freq[i] > freq[i - 1] && freq[i] > freq[i + 1]) {
      best = i;
      minimum = false;
      break;
    }
  }
  if (best < 0)
    throw std::domain_error(
        "tracked branch frequency is monotone across the scan range; no "
        "stationary point to refine");

  // The reference eigenvector pins the branch identity inside the bracket.
  const int ref_mode = coarse.branch_mode_index[best][branch];
  const MatX ref_vectors = coarse.points[best].eigenvectors;
  auto branch_frequency = [&](double field) {
    NormalModeSet modes =
        solve_modes(with_field(trap, axis, field), species);
    int pick = 0;
    double overlap = -1.0;
    for (int c = 0; c < modes.eigenvectors.cols(); ++c) {
      const double o =
          std::abs(ref_vectors.col(ref_mode).dot(modes.eigenvectors.col(c)));
      if (o > overlap) {
        overlap = o;
        pick = c;
      }
    }
    return modes.frequency_hz(pick);
  };
  const double sign = minimum ? 1.0 : -1.0;

  // Golden-section on the bracketing coarse interval.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = grid[best - 1], hi = grid[best + 1];
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = sign * branch_frequency(x1), f2 = sign * branch_frequency(x2);
  while (hi - lo > tolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = sign * branch_frequency(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = sign * branch_frequency(x2);
    }
  }

  CompensationResult out;
  out.applied_field = 0.5 * (lo + hi);
  out.branch_frequency_hz = branch_frequency(out.applied_field);
  out.coarse_index = best;
  out.coarse = std::move(coarse);
  return out;
}

} // namespace ionsim
