#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "ionsim/constants.hpp"

namespace ionsim {

// SplitMix64 finalizer; decorrelates structured seed inputs.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Independent stream for one Monte Carlo trajectory. The mapping depends
// only on (master_seed, index), so trajectories may be evaluated in any
// order, or concurrently, and still draw identical samples.
inline std::mt19937_64 trajectory_rng(std::uint64_t master_seed,
                                      std::uint64_t index) {
  return std::mt19937_64(splitmix64(master_seed ^ splitmix64(index)));
}

// The samplers below are written out instead of using <random>'s
// distributions so that sampled values depend only on the raw engine
// stream, not on standard-library internals.

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool sample_bernoulli(double p, std::mt19937_64& rng) {
  if (!(p >= 0.0) || p > 1.0)
    throw std::invalid_argument("sample_bernoulli: p must lie in [0, 1]");
  return uniform01(rng) < p;
}

// Poisson by CDF inversion; exact and fast for the photon-count means used
// in detection windows.
inline int sample_poisson(double mean, std::mt19937_64& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument(
        "sample_poisson: mean must be finite and non-negative");
  if (mean == 0.0)
    return 0;
  const double u = uniform01(rng);
  double pmf = std::exp(-mean);
  double cdf = pmf;
  int k = 0;
  const int cap = static_cast<int>(20.0 + 10.0 * mean);
  while (u > cdf && k < cap) {
    ++k;
    pmf *= mean / k;
    cdf += pmf;
  }
  return k;
}

// Thermal occupation: P(n) = nbar^n / (nbar + 1)^(n+1), a geometric law
// with ratio nbar / (nbar + 1).
inline int sample_thermal(double nbar, std::mt19937_64& rng) {
  if (!(nbar >= 0.0))
    throw std::invalid_argument("sample_thermal: nbar must be non-negative");
  if (nbar == 0.0)
    return 0;
  const double u = uniform01(rng);
  return static_cast<int>(std::log1p(-u) / std::log(nbar / (nbar + 1.0)));
}

// Standard normal via Box-Muller.
inline double sample_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0)
    u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(constants::two_pi * u2);
}

} // namespace ionsim
