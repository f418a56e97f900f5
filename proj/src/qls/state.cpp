#include "ionsim/qls/state.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ionsim/errors.hpp"

namespace ionsim {

InternalLevelSet::InternalLevelSet(std::string ion_,
                                   std::vector<std::string> levels_,
                                   std::vector<DecayChannel> decay_)
    : ion(std::move(ion_)), levels(std::move(levels_)),
      decay(std::move(decay_)) {
  if (levels.size() < 2)
    throw std::invalid_argument("ion '" + ion +
                                "': at least two internal levels required");
  std::set<std::string> seen(levels.begin(), levels.end());
  if (seen.size() != levels.size())
    throw std::invalid_argument("ion '" + ion +
                                "': level labels must be unique");
  for (const DecayChannel& ch : decay) {
    level_index(ch.upper);
    level_index(ch.lower);
    if (!(ch.lifetime_s > 0.0))
      throw std::invalid_argument("ion '" + ion + "': decay channel " +
                                  ch.upper + " -> " + ch.lower +
                                  " must have a positive lifetime");
  }
}

int InternalLevelSet::level_index(const std::string& label) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == label)
      return static_cast<int>(i);
  throw std::invalid_argument("ion '" + ion + "' has no level '" + label +
                              "'");
}

JointState JointState::ground(std::vector<InternalLevelSet> ions_, int n_max_,
                              int logic_ion_) {
  if (ions_.empty())
    throw std::invalid_argument("JointState requires at least one ion");
  if (n_max_ < 1)
    throw std::invalid_argument("JointState requires n_max >= 1");
  JointState state;
  state.ions = std::move(ions_);
  state.n_max = n_max_;
  if (logic_ion_ < 0 || logic_ion_ >= static_cast<int>(state.ions.size()))
    throw std::out_of_range("logic ion index out of range");
  state.logic_ion = logic_ion_;
  state.amplitudes = VecXc::Zero(state.dim());
  state.amplitudes[0] = 1.0;
  return state;
}

long JointState::internal_dim() const {
  long d = 1;
  for (const InternalLevelSet& ls : ions)
    d *= ls.size();
  return d;
}

long JointState::ion_stride(int ion) const {
  if (ion < 0 || ion >= static_cast<int>(ions.size()))
    throw std::out_of_range("ion index out of range");
  long stride = 1;
  for (std::size_t j = ions.size(); j-- > static_cast<std::size_t>(ion) + 1;)
    stride *= ions[j].size();
  return stride;
}

long JointState::basis_index(const std::vector<int>& levels, int n) const {
  if (levels.size() != ions.size())
    throw std::invalid_argument("level list does not match ion count");
  if (n < 0 || n > n_max)
    throw std::out_of_range("Fock index out of range");
  long internal = 0;
  for (std::size_t j = 0; j < ions.size(); ++j) {
    if (levels[j] < 0 || levels[j] >= ions[j].size())
      throw std::out_of_range("level index out of range for ion " +
                              std::to_string(j));
    internal = internal * ions[j].size() + levels[j];
  }
  return internal * (n_max + 1) + n;
}

int JointState::level_of(long internal_index, int ion) const {
  return static_cast<int>((internal_index / ion_stride(ion)) %
                          ions[ion].size());
}

double JointState::level_population(int ion, int level) const {
  if (ion < 0 || ion >= static_cast<int>(ions.size()))
    throw std::out_of_range("ion index out of range");
  if (level < 0 || level >= ions[ion].size())
    throw std::out_of_range("level index out of range");
  const long fock = n_max + 1;
  double pop = 0.0;
  for (long i = 0; i < internal_dim(); ++i)
    if (level_of(i, ion) == level)
      pop += amplitudes.segment(i * fock, fock).squaredNorm();
  return pop;
}

double JointState::fock_population(int n) const {
  if (n < 0 || n > n_max)
    throw std::out_of_range("Fock index out of range");
  const long fock = n_max + 1;
  double pop = 0.0;
  for (long i = 0; i < internal_dim(); ++i)
    pop += std::norm(amplitudes[i * fock + n]);
  return pop;
}

void JointState::renormalize() {
  const double nrm = norm();
  if (!(nrm > 0.0))
    throw std::runtime_error("cannot renormalize a zero state");
  amplitudes /= nrm;
}

void JointState::check_norm(double tol) const {
  const double err = std::abs(norm() - 1.0);
  if (err > tol) {
    std::ostringstream msg;
    msg << "state norm drifted by " << err << " (tolerance " << tol << ")";
    throw std::runtime_error(msg.str());
  }
}

void JointState::check_truncation(double tol) const {
  const double edge = fock_population(n_max);
  if (edge >= tol) {
    std::ostringstream msg;
    msg << "population " << edge << " at the top Fock level exceeds " << tol
        << "; increase n_max (currently " << n_max << ")";
    throw TruncationError(msg.str());
  }
}

} // namespace ionsim
