#include "ionsim/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

struct IonCoeffs {
  Vec3 spring;     // Z^2 a_i/m + Z b_i, J/m^2
  double charge;   // C
  double grad;     // Z^2 (m_ref/m) G, N
  double cubic;    // Z c3, J/m^3
  double twist;    // q c_t, J/m^2
};

std::vector<IonCoeffs> ion_coeffs(const TrapModel& trap,
                                  const std::vector<IonSpecies>& species) {
  if (species.empty())
    throw std::invalid_argument("chain requires at least one ion");
  if (trap.axial_gradient != 0.0 && !(trap.reference_mass > 0.0))
    throw std::invalid_argument(
        "axial_gradient requires a positive reference_mass");
  const double c3 = cubic_coefficient(trap);

  std::vector<IonCoeffs> out;
  out.reserve(species.size());
  for (const IonSpecies& s : species) {
    const double m = s.mass_kg();
    const double z = static_cast<double>(s.charge);
    IonCoeffs c;
    for (int i = 0; i < 3; ++i)
      c.spring[i] = z * z * trap.rf_coeff[i] / m + z * trap.static_coeff[i];
    c.charge = s.charge_C();
    c.grad = trap.axial_gradient != 0.0
                 ? z * z * (trap.reference_mass / m) * trap.axial_gradient
                 : 0.0;
    c.cubic = z * c3;
    c.twist = c.charge * trap.twist_coeff;
    out.push_back(c);
  }
  return out;
}

void check_size(const std::vector<IonSpecies>& species, const VecX& positions,
                const std::vector<Vec3>& forces) {
  if (positions.size() != static_cast<long>(3 * species.size()))
    throw std::invalid_argument("positions must have 3 coordinates per ion");
  if (!forces.empty() && forces.size() != species.size())
    throw std::invalid_argument(
        "external_forces must be empty or have one entry per ion");
}

double coulomb_prefactor(const IonSpecies& a, const IonSpecies& b) {
  return constants::unit_charge_coulomb * a.charge * b.charge;
}

} // namespace

double chain_potential(const TrapModel& trap,
                       const std::vector<IonSpecies>& species,
                       const VecX& positions,
                       const std::vector<Vec3>& external_forces) {
  check_size(species, positions, external_forces);
  const auto coeffs = ion_coeffs(trap, species);
  const std::size_t n = species.size();

  double u = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3 r = positions.segment<3>(3 * j);
    const IonCoeffs& c = coeffs[j];
    u += 0.5 * (c.spring.array() * r.array().square()).sum();
    u += c.charge * trap.uniform_field.dot(r);
    u += c.grad * r[2];
    u += c.cubic * r[2] * r[2] * r[2];
    u += c.twist * r[1] * r[2];
    if (!external_forces.empty())
      u -= external_forces[j].dot(r);
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = j + 1; l < n; ++l) {
      const Vec3 d = positions.segment<3>(3 * j) - positions.segment<3>(3 * l);
      u += coulomb_prefactor(species[j], species[l]) / d.norm();
    }
  return u;
}

VecX chain_gradient(const TrapModel& trap,
                    const std::vector<IonSpecies>& species,
                    const VecX& positions,
                    const std::vector<Vec3>& external_forces) {
  check_size(species, positions, external_forces);
  const auto coeffs = ion_coeffs(trap, species);
  const std::size_t n = species.size();

  VecX g = VecX::Zero(positions.size());
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3 r = positions.segment<3>(3 * j);
    const IonCoeffs& c = coeffs[j];
    Vec3 gj = c.spring.array() * r.array();
    gj += c.charge * trap.uniform_field;
    gj[2] += c.grad + 3.0 * c.cubic * r[2] * r[2];
    gj[1] += c.twist * r[2];
    gj[2] += c.twist * r[1];
    if (!external_forces.empty())
      gj -= external_forces[j];
    g.segment<3>(3 * j) = gj;
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = j + 1; l < n; ++l) {
      const Vec3 d = positions.segment<3>(3 * j) - positions.segment<3>(3 * l);
      const double rr = d.norm();
      // dU/dr_j of kc/|r_j - r_l|.
      const Vec3 du = -coulomb_prefactor(species[j], species[l]) * d /
                      (rr * rr * rr);
      g.segment<3>(3 * j) += du;
      g.segment<3>(3 * l) -= du;
    }
  return g;
}

MatX chain_hessian(const TrapModel& trap,
                   const std::vector<IonSpecies>& species,
                   const VecX& positions,
                   const std::vector<Vec3>& external_forces) {
  check_size(species, positions, external_forces);
  const auto coeffs = ion_coeffs(trap, species);
  const std::size_t n = species.size();

  MatX h = MatX::Zero(positions.size(), positions.size());
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3 r = positions.segment<3>(3 * j);
    const IonCoeffs& c = coeffs[j];
    for (int i = 0; i < 3; ++i)
      h(3 * j + i, 3 * j + i) = c.spring[i];
    h(3 * j + 2, 3 * j + 2) += 6.0 * c.cubic * r[2];
    h(3 * j + 1, 3 * j + 2) += c.twist;
    h(3 * j + 2, 3 * j + 1) += c.twist;
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = j + 1; l < n; ++l) {
      const Vec3 d = positions.segment<3>(3 * j) - positions.segment<3>(3 * l);
      const double rr = d.norm();
      const Vec3 dn = d / rr;
      const Eigen::Matrix3d block =
          coulomb_prefactor(species[j], species[l]) / (rr * rr * rr) *
          (3.0 * dn * dn.transpose() - Eigen::Matrix3d::Identity());
      h.block<3, 3>(3 * j, 3 * j) += block;
      h.block<3, 3>(3 * l, 3 * l) += block;
      h.block<3, 3>(3 * j, 3 * l) -= block;
      h.block<3, 3>(3 * l, 3 * j) -= block;
    }
  return h;
}

VecX default_seed_positions(const TrapModel& trap,
                            const std::vector<IonSpecies>& species) {
  // Two-ion spacing of the lightest species as pitch; heavier chains spread
  // slightly wider but Newton recovers the rest.
  const IonSpecies* lightest = &species.front();
  for (const IonSpecies& s : species)
    if (s.mass_kg() < lightest->mass_kg())
      lightest = &s;
  const Vec3 w2 = secular_omega_sq(trap, *lightest);
  if (!(w2[2] > 0.0))
    throw InstabilityError("trap unstable for species '" + lightest->name +
                               "' on axis z: total omega^2 <= 0",
                           2);
  const double stiffness = lightest->mass_kg() * w2[2];
  const double kc = constants::unit_charge_coulomb * lightest->charge *
                    lightest->charge;
  const double pitch = std::cbrt(2.0 * kc / stiffness);

  const std::size_t n = species.size();
  VecX x = VecX::Zero(3 * n);
  for (std::size_t j = 0; j < n; ++j)
    x[3 * j + 2] = pitch * (static_cast<double>(j) -
                            0.5 * static_cast<double>(n - 1));
  return x;
}

namespace {

// Sign convention shared with the mode analysis: the component of largest
// magnitude is made positive; ties resolve to the lowest index.
void orient_vector(Eigen::Ref<VecX> v) {
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

struct DescentResult {
  VecX x;
  double energy;
  double gradient_norm;
  bool converged;
  long iterations;
};

// Damped Newton with eigenvalue-clamped steps. Far from a minimum the step
// is backtracked on the energy; once steps shrink inside the quadratic
// basin (anharmonic corrections are O(step/spacing), negligible below a
// nanometer) full Newton steps are taken without a line search, since
// energy differences there are beneath double-precision noise while the
// iteration itself remains a contraction. Saddle points reached with a
// vanishing gradient are escaped along the most negative curvature with a
// deterministic sign convention.
DescentResult minimize_chain(const TrapModel& trap,
                             const std::vector<IonSpecies>& species,
                             const VecX& start,
                             const EquilibriumOptions& opts) {
  constexpr double kNewtonTrust = 1.0e-9; // m, full-step region

  const double grad_tol =
      opts.gradient_tol_per_ion * static_cast<double>(species.size());

  VecX x = start;
  double last_update = std::numeric_limits<double>::infinity();
  long iter = 0;
  int escapes = 0;

  while (iter < opts.max_iterations) {
    ++iter;
    if (x.cwiseAbs().maxCoeff() > opts.escape_radius)
      throw ConvergenceError(
          "chain relaxation diverged beyond the escape radius",
          std::vector<double>(x.data(), x.data() + x.size()));

    const VecX g = chain_gradient(trap, species, x, opts.external_forces);
    const MatX h = chain_hessian(trap, species, x, opts.external_forces);

    Eigen::SelfAdjointEigenSolver<MatX> es(h);
    const VecX& lam = es.eigenvalues();
    const MatX& vec = es.eigenvectors();
    const double scale = lam.cwiseAbs().maxCoeff();

    if (g.norm() < grad_tol && last_update < opts.position_tol) {
      // Stationary to within tolerance. Either a genuine minimum, or a
      // saddle to be escaped along its steepest negative curvature.
      if (lam[0] > -1.0e-8 * scale)
        return {x, chain_potential(trap, species, x, opts.external_forces),
                g.norm(), true, iter};

      VecX dir = vec.col(0);
      orient_vector(dir);
      // Expanding line search along the escape direction, accepting only
      // strict energy decreases.
      const double u = chain_potential(trap, species, x,
                                       opts.external_forces);
      double t = 1.0e-10;
      double best_t = 0.0;
      double best_u = u;
      for (int k = 0; k < 120; ++k) {
        const double cand =
            chain_potential(trap, species, x + t * dir, opts.external_forces);
        if (cand < best_u) {
          best_u = cand;
          best_t = t;
        } else if (best_t > 0.0) {
          break;
        }
        t *= 2.0;
      }
      if (best_t == 0.0) {
        // Curvature too shallow to exploit; accept as converged.
        return {x, u, g.norm(), true, iter};
      }
      x += best_t * dir;
      last_update = best_t;
      if (++escapes > 64)
        throw ConvergenceError(
            "chain relaxation failed to settle after repeated saddle escapes",
            std::vector<double>(x.data(), x.data() + x.size()));
      continue;
    }

    // Newton direction with eigenvalues clamped positive (always a strict
    // descent direction for a nonzero gradient).
    const double floor = std::max(1.0e-8 * scale,
                                  std::numeric_limits<double>::min());
    VecX inv = lam;
    for (long i = 0; i < inv.size(); ++i)
      inv[i] = 1.0 / std::max(lam[i], floor);
    const VecX step = -(vec * inv.asDiagonal() * vec.transpose() * g);

    if (step.cwiseAbs().maxCoeff() < kNewtonTrust) {
      x += step;
      last_update = step.cwiseAbs().maxCoeff();
      continue;
    }

    const double u = chain_potential(trap, species, x, opts.external_forces);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const VecX cand_x = x + t * step;
      const double cand_u =
          chain_potential(trap, species, cand_x, opts.external_forces);
      if (cand_u <= u) {
        last_update = (t * step).cwiseAbs().maxCoeff();
        x = cand_x;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // A large step that cannot lower the energy: the point is stationary
      // at evaluation precision, so let the stationarity branch decide.
      last_update = 0.0;
      if (!(g.norm() < grad_tol)) {
        // Gradient inconsistent with a stationary point; give up on this
        // seed rather than loop without progress.
        throw ConvergenceError(
            "chain relaxation stalled with a non-vanishing gradient",
            std::vector<double>(x.data(), x.data() + x.size()));
      }
    }
  }
  throw ConvergenceError(
      "chain equilibrium search exhausted the iteration cap",
      std::vector<double>(x.data(), x.data() + x.size()));
}

ChainConfiguration package(const TrapModel& trap,
                           const std::vector<IonSpecies>& species,
                           const DescentResult& res) {
  ChainConfiguration cfg;
  cfg.species = species;
  cfg.positions = res.x;
  cfg.potential_energy = res.energy;
  cfg.gradient_norm = res.gradient_norm;
  cfg.converged = res.converged;
  return cfg;
}

} // namespace

ChainConfiguration find_equilibrium(const TrapModel& trap,
                                    const std::vector<IonSpecies>& species,
                                    std::optional<VecX> seed,
                                    const EquilibriumOptions& opts) {
  for (const IonSpecies& s : species) {
    const Vec3 w2 = secular_omega_sq(trap, s);
    for (int i = 0; i < 3; ++i)
      if (!(w2[i] > 0.0))
        throw InstabilityError(
            "trap unstable for species '" + s.name + "' on axis " +
                std::string(1, "xyz"[i]) + ": total omega^2 <= 0",
            i);
  }

  const VecX primary = seed ? *seed : default_seed_positions(trap, species);
  if (primary.size() != static_cast<long>(3 * species.size()))
    throw std::invalid_argument("seed must have 3 coordinates per ion");

  // Axis-permuted fallbacks: the same spacing laid along each axis.
  std::vector<VecX> seeds{primary};
  for (int axis = 0; axis < 3; ++axis) {
    VecX alt = VecX::Zero(primary.size());
    for (std::size_t j = 0; j < species.size(); ++j) {
      const Vec3 r = primary.segment<3>(3 * j);
      alt[3 * j + axis] = r.norm() * (r.sum() < 0.0 ? -1.0 : 1.0);
    }
    seeds.push_back(alt);
  }

  std::exception_ptr last_error;
  for (const VecX& s : seeds) {
    try {
      return package(trap, species, minimize_chain(trap, species, s, opts));
    } catch (const ConvergenceError&) {
      last_error = std::current_exception();
    }
  }
  std::rethrow_exception(last_error);
}

ChainConfiguration relax(const TrapModel& trap,
                         const std::vector<IonSpecies>& species,
                         const VecX& start, const EquilibriumOptions& opts) {
  return package(trap, species, minimize_chain(trap, species, start, opts));
}

} // namespace ionsim
