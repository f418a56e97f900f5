#include "ionsim/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

double NormalModeSet::frequency_hz(int mode) const {
  return frequencies[mode] / constants::two_pi;
}

Vec3 NormalModeSet::ion_component(int ion, int mode) const {
  return eigenvectors.col(mode).segment<3>(3 * ion);
}

namespace {

void orient_column(Eigen::Ref<VecX> v) {
  int imax = 0;
  double best = std::abs(v[0]);
  for (int i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      imax = i;
    }
  if (v[imax] < 0.0)
    v = -v;
}

// Cyclic Jacobi diagonalization. For mode problems (3N ≤ 12) this converges
// in a handful of sweeps and, unlike a library solver, its results are
// reproducible bit for bit across platforms and library versions. It also
// preserves structure exactly: couplings that are exactly zero stay zero, and
// a 2x2 block with bitwise-equal diagonal entries rotates by exactly 45°, so
// the symmetric/antisymmetric eigenvectors of a homogeneous pair come out
// with exactly opposite components.
void jacobi_eigen(MatX a, VecX& values, MatX& vectors) {
  const long n = a.rows();
  vectors = MatX::Identity(n, n);
  values.resize(n);

  const double scale = a.norm();
  if (scale > 0.0) {
    constexpr int kMaxSweeps = 64;
    const double tol =
        std::numeric_limits<double>::epsilon() * scale;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
      double off_sq = 0.0;
      for (long p = 0; p + 1 < n; ++p)
        for (long q = p + 1; q < n; ++q)
          off_sq += a(p, q) * a(p, q);
      if (std::sqrt(2.0 * off_sq) <= tol)
        break;
      for (long p = 0; p + 1 < n; ++p)
        for (long q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0)
            continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          double t;
          if (std::abs(theta) > 1.0e150) // theta^2 would overflow
            t = 0.5 / theta;
          else
            t = std::copysign(1.0, theta) /
                (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const double tau = s / (1.0 + c);
          a(p, p) -= t * apq;
          a(q, q) += t * apq;
          a(p, q) = a(q, p) = 0.0;
          for (long k = 0; k < n; ++k) {
            if (k == p || k == q)
              continue;
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = a(p, k) = akp - s * (akq + tau * akp);
            a(k, q) = a(q, k) = akq + s * (akp - tau * akq);
          }
          // Plain-form update keeps v(:,p) = -v(:,q) component-wise exact
          // when the rotation is exactly 45° (t = 1, so s == c bitwise).
          for (long k = 0; k < n; ++k) {
            const double vkp = vectors(k, p);
            const double vkq = vectors(k, q);
            vectors(k, p) = c * vkp - s * vkq;
            vectors(k, q) = s * vkp + c * vkq;
          }
        }
    }
    if (sweep == kMaxSweeps)
      throw std::runtime_error("jacobi_eigen failed to converge");
  }

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(),
                   [&a](long i, long j) { return a(i, i) < a(j, j); });
  MatX sorted(n, n);
  for (long i = 0; i < n; ++i) {
    values[i] = a(order[i], order[i]);
    sorted.col(i) = vectors.col(order[i]);
  }
  vectors.swap(sorted);
}

} // namespace

NormalModeSet normal_modes(const TrapModel& trap,
                           const ChainConfiguration& config,
                           const std::vector<Vec3>& external_forces) {
  if (!config.converged)
    throw std::invalid_argument(
        "normal_modes requires a converged equilibrium configuration");

  const MatX h =
      chain_hessian(trap, config.species, config.positions, external_forces);
  const long dim = h.rows();

  VecX inv_sqrt_m(dim);
  for (std::size_t j = 0; j < config.species.size(); ++j) {
    const double w = 1.0 / std::sqrt(config.species[j].mass_kg());
    for (int i = 0; i < 3; ++i)
      inv_sqrt_m[3 * j + i] = w;
  }
  const MatX hw =
      inv_sqrt_m.asDiagonal() * h * inv_sqrt_m.asDiagonal();

  NormalModeSet modes;
  modes.config = config;
  jacobi_eigen(hw, modes.omega_sq, modes.eigenvectors);
  modes.frequencies = modes.omega_sq.cwiseAbs().cwiseSqrt();
  modes.stable.resize(dim);
  for (long a = 0; a < dim; ++a) {
    modes.stable[a] = modes.omega_sq[a] > 0.0;
    orient_column(modes.eigenvectors.col(a));
  }

  const double scale = modes.omega_sq.cwiseAbs().maxCoeff();
  const MatX gram =
      modes.eigenvectors.transpose() * modes.eigenvectors -
      MatX::Identity(dim, dim);
  if (gram.cwiseAbs().maxCoeff() > 1.0e-9)
    throw std::runtime_error("normal_modes: eigenvectors lost orthonormality");
  const MatX residual = hw * modes.eigenvectors -
                        modes.eigenvectors * modes.omega_sq.asDiagonal();
  if (residual.cwiseAbs().maxCoeff() > 1.0e-9 * std::max(scale, 1.0))
    throw std::runtime_error("normal_modes: eigen residual out of tolerance");

  for (long a = 0; a + 1 < dim; ++a)
    if (std::abs(modes.omega_sq[a + 1] - modes.omega_sq[a]) <=
        1.0e-6 * scale) {
      modes.warnings.push_back("near-degenerate mode pair at " +
                               std::to_string(modes.frequency_hz(a) * 1e-6) +
                               " MHz");
    }
  return modes;
}

NormalModeSet solve_modes(const TrapModel& trap,
                          const std::vector<IonSpecies>& species) {
  return normal_modes(trap, find_equilibrium(trap, species));
}

namespace {

double extent_prefactor(const NormalModeSet& modes, int ion, int mode) {
  if (ion < 0 || ion >= static_cast<int>(modes.config.species.size()))
    throw std::out_of_range("ion index out of range");
  if (mode < 0 || mode >= modes.frequencies.size())
    throw std::out_of_range("mode index out of range");
  if (!modes.stable[mode])
    throw std::invalid_argument(
        "ground-state quantities are undefined for an unstable mode");
  const double m = modes.config.species[ion].mass_kg();
  return std::sqrt(constants::hbar / (2.0 * m * modes.frequencies[mode]));
}

} // namespace

double ground_state_extent(const NormalModeSet& modes, int ion, int mode) {
  return extent_prefactor(modes, ion, mode) *
         modes.ion_component(ion, mode).norm();
}

Vec3 ground_state_extent_components(const NormalModeSet& modes, int ion,
                                    int mode) {
  return extent_prefactor(modes, ion, mode) *
         modes.ion_component(ion, mode).cwiseAbs();
}

double lamb_dicke(const NormalModeSet& modes, const Vec3& wavevector, int ion,
                  int mode) {
  return extent_prefactor(modes, ion, mode) *
         wavevector.dot(modes.ion_component(ion, mode));
}

double extract_mode_frequency(double red_detuning, double blue_detuning) {
  if (!(blue_detuning > red_detuning))
    throw std::invalid_argument(
        "extract_mode_frequency: blue sideband must lie above the red");
  return 0.5 * (blue_detuning - red_detuning);
}

} // namespace ionsim
