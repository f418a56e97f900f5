#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ionsim {

using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;

// A spontaneous-emission channel between two internal levels of one ion.
struct DecayChannel {
  std::string upper;
  std::string lower;
  double lifetime_s = 0.0;
};

// The internal level structure of one ion: a label, at least two uniquely
// named levels, and any decay channels among them.
struct InternalLevelSet {
  std::string ion;
  std::vector<std::string> levels;
  std::vector<DecayChannel> decay;

  InternalLevelSet() = default;
  InternalLevelSet(std::string ion_, std::vector<std::string> levels_,
                   std::vector<DecayChannel> decay_ = {});

  int size() const { return static_cast<int>(levels.size()); }
  // Index of a level label; throws std::invalid_argument if unknown.
  int level_index(const std::string& label) const;
};

// A pure state over (product of internal levels) x (one shared motional
// mode truncated at Fock level n_max). Amplitudes are stored internal-
// config-major, Fock-minor: index = internal_index * (n_max + 1) + n,
// where internal_index runs over ion levels with ion 0 most significant.
struct JointState {
  std::vector<InternalLevelSet> ions;
  int n_max = 10;
  // The fluorescence-readout ion; also the ion pumped to its lowest level
  // by sympathetic cooling.
  int logic_ion = 0;
  VecXc amplitudes;

  // Every ion in its first level, motion in |0>.
  static JointState ground(std::vector<InternalLevelSet> ions, int n_max = 10,
                           int logic_ion = 0);

  long internal_dim() const;
  long dim() const { return internal_dim() * (n_max + 1); }

  // Stride of one level step of `ion` within the internal index.
  long ion_stride(int ion) const;
  long basis_index(const std::vector<int>& levels, int n) const;
  int level_of(long internal_index, int ion) const;

  double level_population(int ion, int level) const;
  double fock_population(int n) const;

  double norm() const { return amplitudes.norm(); }
  void renormalize();
  // Throws std::runtime_error when | ||psi|| - 1 | exceeds tol.
  void check_norm(double tol = 1.0e-10) const;
  // Throws TruncationError when the edge Fock level holds >= tol population.
  void check_truncation(double tol = 1.0e-6) const;
};

} // namespace ionsim
