#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ionsim {

// A trap axis with non-positive total curvature or a secular frequency
// beyond the adiabatic bound for some species in use.
class InstabilityError : public std::runtime_error {
public:
  InstabilityError(std::string message, int axis)
      : std::runtime_error(std::move(message)), axis_(axis) {}
  int axis() const { return axis_; }

private:
  int axis_;
};

// Equilibrium search exhausted its iteration budget. Carries the last
// iterate so callers can inspect how far the solver got.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(std::string message, std::vector<double> last_positions)
      : std::runtime_error(std::move(message)),
        last_positions_(std::move(last_positions)) {}
  const std::vector<double>& last_positions() const { return last_positions_; }

private:
  std::vector<double> last_positions_;
};

// Motional population reached the truncated edge of the Fock register.
class TruncationError : public std::runtime_error {
public:
  explicit TruncationError(std::string message)
      : std::runtime_error(std::move(message)) {}
};

// A quasi-static continuation step failed to relax.
class ContinuationError : public std::runtime_error {
public:
  ContinuationError(std::string message, int step)
      : std::runtime_error(std::move(message)), step_(step) {}
  int step() const { return step_; }

private:
  int step_;
};

// A stated physical-assumption precondition was violated hard.
class AssumptionError : public std::runtime_error {
public:
  explicit AssumptionError(std::string message)
      : std::runtime_error(std::move(message)) {}
};

} // namespace ionsim
