#pragma once

#include <random>

#include "ionsim/chain.hpp"
#include "ionsim/qls/state.hpp"

namespace ionsim {

// State-dependent fluorescence: the mean photon count collected in one
// detection window, for each internal level of the logic ion (in the order
// of that ion's level list).
struct DetectionModel {
  VecX mean_counts;
  double window_s = 0.0;

  // Means must be non-negative and not all equal (a bright level must
  // outshine a dark one); the count must match the logic ion's level count.
  void validate(int level_count) const;
};

// Poisson probability of `count` photons at the given mean.
double poisson_pmf(int count, double mean);

struct DetectionOutcome {
  int count = 0;
  int level = 0; // collapsed level of the logic ion
  JointState state;
};

// Projectively samples the logic ion's level, collapses the state onto it,
// then samples a Poisson photon count for that level.
DetectionOutcome detect(const JointState& state, const DetectionModel& model,
                        std::mt19937_64& rng);

// posterior_i proportional to prior_i * P(count | level i). Throws
// std::domain_error when every candidate assigns zero likelihood.
VecX bayes_update(const VecX& prior, int count, const DetectionModel& model);

} // namespace ionsim
