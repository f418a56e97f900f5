#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/modes.hpp"

namespace ionsim {

// Normal-mode spectra versus a uniform field applied along one axis, with
// mode identity tracked across the scan. Branch b starts as the b-th
// ascending mode of the first grid point; at every later point the branches
// are re-matched to the eigenvectors of the previous point by greedy maximum
// overlap, so curves keep their identity through crossings. Tracking is a
// sequential post-pass over per-point results; the per-point spectra do not
// depend on scan order.
struct ModeScanResult {
  int axis = 2;
  VecX field_values;                    // V/m added to the trap's field
  std::vector<NormalModeSet> points;    // one per completed grid point
  MatX branch_frequency_hz;             // rows: grid points, cols: branches
  std::vector<std::vector<int>> branch_mode_index;  // branch -> column per point
  bool complete = false;
  int failed_index = -1;                // grid index of the aborted point
  std::string failure;                  // diagnostic when incomplete
};

// Re-equilibrates and rediagonalizes the chain at every field value
// (monotone grid required). Equilibration failure aborts the scan and
// returns the completed prefix with `complete = false`.
ModeScanResult scan_field(const TrapModel& trap,
                          const std::vector<IonSpecies>& species, int axis,
                          const VecX& field_values);

// Stray-field compensation by spectroscopy of the radial out-of-phase mode:
// scans the applied field coarsely, tracks the lowest axis-dominant mode
// (the out-of-phase branch), and refines the stationary point of its
// frequency by golden-section search. The branch curvature is taken from
// the coarse scan, so the vertex is found whether the stationary point is a
// minimum or a maximum of frequency. The returned applied field cancels a
// hidden uniform stray field on that axis: estimate + E_stray = 0.
struct CompensationResult {
  double applied_field = 0.0;     // V/m at the stationary point
  double branch_frequency_hz = 0.0;
  int coarse_index = 0;           // grid index bracketing the vertex
  ModeScanResult coarse;
};

CompensationResult compensate_stray_field(const TrapModel& trap,
                                          const std::vector<IonSpecies>& species,
                                          int axis, double scan_min = -300.0,
                                          double scan_max = 300.0,
                                          int coarse_points = 25,
                                          double tolerance = 0.25);

} // namespace ionsim
