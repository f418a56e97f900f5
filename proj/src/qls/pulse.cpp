#include "ionsim/qls/pulse.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

#include "ionsim/chain.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/rates.hpp"

namespace ionsim {

namespace {

constexpr std::complex<double> kImag{0.0, 1.0};

struct ResolvedTargets {
  std::vector<int> ions;
  std::vector<double> weight;  // coupling relative to the first target
  std::vector<int> lower;      // per-target level indices
  std::vector<int> upper;
  std::vector<long> stride;    // internal-index stride per target
};

ResolvedTargets resolve_targets(const JointState& state, const Pulse& pulse) {
  if (pulse.targets.empty())
    throw std::invalid_argument("pulse requires at least one target ion");
  if (!std::isfinite(pulse.theta))
    throw std::invalid_argument("pulse angle must be finite");
  std::set<int> seen;
  for (int t : pulse.targets) {
    if (t < 0 || t >= static_cast<int>(state.ions.size()))
      throw std::out_of_range("pulse target ion out of range");
    if (!seen.insert(t).second)
      throw std::invalid_argument("pulse targets must be distinct");
  }

  const bool sideband = pulse.kind == PulseKind::red_sideband ||
                        pulse.kind == PulseKind::blue_sideband;
  const bool needs_eta =
      sideband || (pulse.kind == PulseKind::carrier && pulse.debye_waller);
  if (needs_eta) {
    if (pulse.eta.size() != pulse.targets.size())
      throw std::invalid_argument(
          "pulse needs one Lamb-Dicke factor per target");
    for (double e : pulse.eta)
      if (sideband ? !(e > 0.0) : !(e >= 0.0))
        throw std::invalid_argument(
            "sideband pulses require positive Lamb-Dicke factors");
  }

  ResolvedTargets rt;
  for (std::size_t j = 0; j < pulse.targets.size(); ++j) {
    const int ion = pulse.targets[j];
    rt.ions.push_back(ion);
    rt.lower.push_back(state.ions[ion].level_index(pulse.lower));
    rt.upper.push_back(state.ions[ion].level_index(pulse.upper));
    rt.stride.push_back(state.ion_stride(ion));
    rt.weight.push_back(sideband ? pulse.eta[j] / pulse.eta[0] : 1.0);
    if (rt.lower.back() == rt.upper.back())
      throw std::invalid_argument(
          "pulse transition needs two distinct levels");
  }
  return rt;
}

void rotate_pair(std::complex<double>& lower, std::complex<double>& upper,
                 double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const std::complex<double> l = lower;
  const std::complex<double> u = upper;
  lower = c * l - kImag * s * u;
  upper = -kImag * s * l + c * u;
}

void apply_carrier(JointState& state, const Pulse& pulse,
                   const ResolvedTargets& rt) {
  const long fock = state.n_max + 1;
  for (std::size_t j = 0; j < rt.ions.size(); ++j) {
    const long shift = (rt.upper[j] - rt.lower[j]) * rt.stride[j];
    for (long i = 0; i < state.internal_dim(); ++i) {
      if (state.level_of(i, rt.ions[j]) != rt.lower[j])
        continue;
      for (int n = 0; n <= state.n_max; ++n) {
        double angle = pulse.theta;
        if (pulse.debye_waller)
          angle *= carrier_rabi_factor(VecX::Constant(1, pulse.eta[j]),
                                       VecX::Constant(1, double(n)));
        rotate_pair(state.amplitudes[i * fock + n],
                    state.amplitudes[(i + shift) * fock + n], angle);
      }
    }
  }
}

// A red or blue sideband conserves, per component, the motional quantum
// number minus (blue) or plus (red) the number of participating targets in
// the upper level. Grouping basis states by that value and by the levels of
// every non-participating slot splits the coupling into small independent
// blocks, each integrated exactly through its eigenbasis. States with no
// coupling partner (for example |lower, 0> under a red sideband) form
// singleton blocks and do not evolve at all.
void apply_sideband(JointState& state, const Pulse& pulse,
                    const ResolvedTargets& rt) {
  const bool blue = pulse.kind == PulseKind::blue_sideband;
  const long fock = state.n_max + 1;

  std::map<std::pair<long, long>, std::vector<long>> blocks;
  for (long i = 0; i < state.internal_dim(); ++i) {
    long masked = i;
    long upper_count = 0;
    for (std::size_t j = 0; j < rt.ions.size(); ++j) {
      const int level = state.level_of(i, rt.ions[j]);
      if (level == rt.upper[j]) {
        masked -= (rt.upper[j] - rt.lower[j]) * rt.stride[j];
        ++upper_count;
      }
    }
    for (int n = 0; n <= state.n_max; ++n) {
      const long conserved = blue ? n - upper_count : n + upper_count;
      blocks[{masked, conserved}].push_back(i * fock + n);
    }
  }

  for (const auto& [key, members] : blocks) {
    const int m = static_cast<int>(members.size());
    if (m == 1)
      continue;
    std::map<long, int> pos;
    for (int s = 0; s < m; ++s)
      pos.emplace(members[s], s);

    MatX h = MatX::Zero(m, m);
    for (int s = 0; s < m; ++s) {
      const long i = members[s] / fock;
      const int n = static_cast<int>(members[s] % fock);
      for (std::size_t j = 0; j < rt.ions.size(); ++j) {
        if (state.level_of(i, rt.ions[j]) != rt.lower[j])
          continue;
        const int np = blue ? n + 1 : n - 1;
        if (np < 0 || np > state.n_max)
          continue;
        const long partner =
            (i + (rt.upper[j] - rt.lower[j]) * rt.stride[j]) * fock + np;
        const auto it = pos.find(partner);
        if (it == pos.end())
          continue;
        const double g =
            0.5 * rt.weight[j] * std::sqrt(blue ? n + 1.0 : double(n));
        h(s, it->second) = g;
        h(it->second, s) = g;
      }
    }

    Eigen::SelfAdjointEigenSolver<MatX> es(h);
    VecXc rotated = VecXc::Zero(m);
    VecXc amps(m);
    for (int s = 0; s < m; ++s)
      amps[s] = state.amplitudes[members[s]];
    const VecXc modal = es.eigenvectors().transpose().cast<std::complex<double>>() * amps;
    for (int k = 0; k < m; ++k)
      rotated += std::exp(-kImag * pulse.theta * es.eigenvalues()[k]) *
                 modal[k] * es.eigenvectors().col(k).cast<std::complex<double>>();
    for (int s = 0; s < m; ++s)
      state.amplitudes[members[s]] = rotated[s];
  }
}

void apply_displacement(JointState& state, const Pulse& pulse) {
  if (!std::isfinite(pulse.alpha.real()) || !std::isfinite(pulse.alpha.imag()))
    throw std::invalid_argument("displacement amplitude must be finite");
  const long fock = state.n_max + 1;
  const MatXc d = displacement_operator(pulse.alpha, state.n_max);
  for (long i = 0; i < state.internal_dim(); ++i)
    state.amplitudes.segment(i * fock, fock) =
        d * state.amplitudes.segment(i * fock, fock);
}

} // namespace

MatXc displacement_operator(std::complex<double> alpha, int n_max) {
  const int dim = n_max + 1;
  MatXc h = MatXc::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) {
    const std::complex<double> g = kImag * alpha * std::sqrt(n + 1.0);
    h(n + 1, n) = g;
    h(n, n + 1) = std::conj(g);
  }
  Eigen::SelfAdjointEigenSolver<MatXc> es(h);
  VecXc phases(dim);
  for (int k = 0; k < dim; ++k)
    phases[k] = std::exp(-kImag * es.eigenvalues()[k]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

JointState apply_pulse(const JointState& state, const Pulse& pulse) {
  state.check_truncation();
  JointState result = state;
  if (pulse.kind == PulseKind::displacement) {
    if (pulse.targets.empty())
      throw std::invalid_argument("pulse requires at least one target ion");
    for (int t : pulse.targets)
      if (t < 0 || t >= static_cast<int>(state.ions.size()))
        throw std::out_of_range("pulse target ion out of range");
    apply_displacement(result, pulse);
  } else {
    const ResolvedTargets rt = resolve_targets(state, pulse);
    if (pulse.kind == PulseKind::carrier)
      apply_carrier(result, pulse, rt);
    else
      apply_sideband(result, pulse, rt);
  }
  result.check_norm();
  result.renormalize();
  result.check_truncation();
  return result;
}

} // namespace ionsim
