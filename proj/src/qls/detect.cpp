#include "ionsim/qls/detect.hpp"

#include <cmath>
#include <stdexcept>

#include "ionsim/random.hpp"

namespace ionsim {

void DetectionModel::validate(int level_count) const {
  if (mean_counts.size() != level_count)
    throw std::invalid_argument(
        "detection model needs one mean count per logic-ion level");
  for (long i = 0; i < mean_counts.size(); ++i)
    if (!(mean_counts[i] >= 0.0) || !std::isfinite(mean_counts[i]))
      throw std::invalid_argument(
          "detection mean counts must be finite and non-negative");
  if (!(mean_counts.maxCoeff() > mean_counts.minCoeff()))
    throw std::invalid_argument(
        "detection needs a bright level with a larger mean count than the "
        "darkest level");
}

double poisson_pmf(int count, double mean) {
  if (count < 0)
    throw std::invalid_argument("photon count must be non-negative");
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("Poisson mean must be finite and non-negative");
  if (mean == 0.0)
    return count == 0 ? 1.0 : 0.0;
  return std::exp(count * std::log(mean) - mean - std::lgamma(count + 1.0));
}

DetectionOutcome detect(const JointState& state, const DetectionModel& model,
                        std::mt19937_64& rng) {
  const int levels = state.ions[state.logic_ion].size();
  model.validate(levels);

  VecX population(levels);
  for (int l = 0; l < levels; ++l)
    population[l] = state.level_population(state.logic_ion, l);

  const double u = uniform01(rng) * population.sum();
  int level = levels - 1;
  double cumulative = 0.0;
  for (int l = 0; l < levels; ++l) {
    cumulative += population[l];
    if (u < cumulative) {
      level = l;
      break;
    }
  }

  DetectionOutcome out;
  out.level = level;
  out.state = state;
  const long fock = state.n_max + 1;
  for (long i = 0; i < state.internal_dim(); ++i)
    if (state.level_of(i, state.logic_ion) != level)
      out.state.amplitudes.segment(i * fock, fock).setZero();
  out.state.renormalize();
  out.count = sample_poisson(model.mean_counts[level], rng);
  return out;
}

VecX bayes_update(const VecX& prior, int count, const DetectionModel& model) {
  if (prior.size() != model.mean_counts.size())
    throw std::invalid_argument(
        "prior length does not match the detection model");
  if (std::abs(prior.sum() - 1.0) > 1.0e-9)
    throw std::invalid_argument("prior must sum to 1");
  VecX posterior(prior.size());
  for (long i = 0; i < prior.size(); ++i)
    posterior[i] = prior[i] * poisson_pmf(count, model.mean_counts[i]);
  const double total = posterior.sum();
  if (!(total > 0.0))
    throw std::domain_error(
        "every candidate assigns zero likelihood to the observed count");
  return posterior / total;
}

} // namespace ionsim
