#pragma once

// Brute-force reference for the pulse engine: writes each pulse generator
// as one dense matrix over the full joint basis and exponentiates it with
// Eigen's Pade scaling-and-squaring — an algorithm disjoint from the
// library's per-manifold eigendecomposition.

#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

#include "ionsim/qls/pulse.hpp"
#include "ionsim/qls/state.hpp"
#include "ionsim/rates.hpp"

namespace oracle {

// Generator G with U = exp(G): G = -i theta H for rotations, and
// G = alpha a^dag - conj(alpha) a for a displacement.
inline ionsim::MatXc pulse_generator(const ionsim::JointState& state,
                                     const ionsim::Pulse& pulse) {
  using ionsim::PulseKind;
  const long fock = state.n_max + 1;
  ionsim::MatXc gen = ionsim::MatXc::Zero(state.dim(), state.dim());
  const std::complex<double> mi{0.0, -1.0};

  if (pulse.kind == PulseKind::displacement) {
    for (long i = 0; i < state.internal_dim(); ++i)
      for (int n = 0; n < state.n_max; ++n) {
        const double root = std::sqrt(n + 1.0);
        gen(i * fock + n + 1, i * fock + n) += pulse.alpha * root;
        gen(i * fock + n, i * fock + n + 1) -= std::conj(pulse.alpha) * root;
      }
    return gen;
  }

  for (std::size_t j = 0; j < pulse.targets.size(); ++j) {
    const int ion = pulse.targets[j];
    const int lo = state.ions[ion].level_index(pulse.lower);
    const int hi = state.ions[ion].level_index(pulse.upper);
    const long shift = (hi - lo) * state.ion_stride(ion);
    const double w = pulse.kind == PulseKind::carrier
                         ? 1.0
                         : pulse.eta[j] / pulse.eta[0];
    for (long i = 0; i < state.internal_dim(); ++i) {
      if (state.level_of(i, ion) != lo)
        continue;
      for (int n = 0; n <= state.n_max; ++n) {
        double g = 0.0;
        int np = n;
        switch (pulse.kind) {
        case PulseKind::carrier:
          g = 0.5;
          if (pulse.debye_waller)
            g *= ionsim::carrier_rabi_factor(
                ionsim::VecX::Constant(1, pulse.eta[j]),
                ionsim::VecX::Constant(1, double(n)));
          break;
        case PulseKind::blue_sideband:
          if (n + 1 > state.n_max)
            continue;
          g = 0.5 * w * std::sqrt(n + 1.0);
          np = n + 1;
          break;
        case PulseKind::red_sideband:
          if (n < 1)
            continue;
          g = 0.5 * w * std::sqrt(double(n));
          np = n - 1;
          break;
        default:
          break;
        }
        const long a = i * fock + n;
        const long b = (i + shift) * fock + np;
        gen(a, b) += mi * pulse.theta * g;
        gen(b, a) += mi * pulse.theta * g;
      }
    }
  }
  return gen;
}

inline ionsim::VecXc evolve_dense(const ionsim::JointState& state,
                                  const ionsim::Pulse& pulse) {
  const ionsim::MatXc u = pulse_generator(state, pulse).exp();
  return u * state.amplitudes;
}

} // namespace oracle
