#include <doctest.h>

#include <ionsim/chain.hpp>
#include <ionsim/constants.hpp>
#include <ionsim/errors.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace ionsim;
namespace k = ionsim::constants;

namespace {

TrapModel static_trap(double fx_hz, double fy_hz, double fz_hz, double m_kg) {
  TrapModel t;
  t.rf_drive = k::two_pi * 100e6;
  t.static_coeff = Vec3(std::pow(k::two_pi * fx_hz, 2),
                        std::pow(k::two_pi * fy_hz, 2),
                        std::pow(k::two_pi * fz_hz, 2)) *
                   m_kg;
  return t;
}

}  // namespace

TEST_CASE("two equal-mass ions sit at the analytic separation") {
  IonSpecies ca{"Ca", 40.0, 1};
  const double f = 1.0e6;
  TrapModel trap = static_trap(5e6, 6e6, f, ca.mass_kg());

  auto cfg = find_equilibrium(trap, {ca, ca});
  REQUIRE(cfg.converged);

  const double w = k::two_pi * f;
  const double d_expected =
      std::cbrt(2.0 * k::unit_charge_coulomb / (ca.mass_kg() * w * w));
  const double z0 = cfg.positions[2], z1 = cfg.positions[5];
  CHECK(z1 - z0 == doctest::Approx(d_expected).epsilon(1e-12).scale(0.0));
  CHECK(z0 + z1 == doctest::Approx(0.0).epsilon(1e-18));
  // Transverse coordinates vanish for the unperturbed trap.
  for (int j : {0, 1, 3, 4})
    CHECK(std::abs(cfg.positions[j]) < 1e-12);
}

TEST_CASE("the reference Be-Mg pair stays on axis") {
  auto cfg = find_equilibrium(fixtures::reference_trap(),
                              {fixtures::kBe, fixtures::kMg});
  REQUIRE(cfg.converged);
  for (int j : {0, 1, 3, 4}) CHECK(std::abs(cfg.positions[j]) < 1e-12);
  // Spacing in the micrometer range, Be on the negative side by seed order.
  const double d = cfg.positions[5] - cfg.positions[2];
  CHECK(d == doctest::Approx(4.76e-6).epsilon(0.01).scale(0.0));
}

TEST_CASE("equilibrium energy never exceeds the seed energy") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto rc = fixtures::random_chain(rng);
    VecX seed = default_seed_positions(rc.trap, rc.species);
    const double seed_energy = chain_potential(rc.trap, rc.species, seed);
    auto cfg = find_equilibrium(rc.trap, rc.species, seed);
    REQUIRE(cfg.converged);
    CHECK(cfg.potential_energy <= seed_energy);
    CHECK(cfg.gradient_norm <
          EquilibriumOptions{}.gradient_tol_per_ion * rc.species.size());
  }
}

TEST_CASE("analytic gradient matches a finite-difference gradient") {
  auto trap = fixtures::reference_trap();
  trap.uniform_field = Vec3(3.0, -2.0, 1.0);
  trap.axial_gradient = 0.2 * k::elementary_charge;
  trap.reference_mass = fixtures::kBe.mass_kg();
  trap.cubic_scale = 230e-6;
  trap.twist_coeff = 5e8;
  std::vector<IonSpecies> species{fixtures::kBe, fixtures::kMg};

  VecX pos(6);
  pos << 12e-9, -20e-9, -2.4e-6, -31e-9, 8e-9, 2.35e-6;
  std::vector<Vec3> forces{Vec3(1e-21, 0, -2e-21), Vec3(0, 3e-21, 0)};

  VecX g = chain_gradient(trap, species, pos, forces);
  const double h = 1e-12;
  for (int i = 0; i < 6; ++i) {
    VecX p = pos, q = pos;
    p[i] += h;
    q[i] -= h;
    const double fd = (chain_potential(trap, species, p, forces) -
                       chain_potential(trap, species, q, forces)) /
                      (2.0 * h);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(0.0));
  }
}

TEST_CASE("analytic Hessian matches the finite-difference oracle entrywise") {
  auto trap = fixtures::reference_trap();
  trap.uniform_field = Vec3(0.0, 150.0, 0.0);
  // Small enough that the y-z cross term keeps every per-ion block positive
  // definite (q*c_t well below sqrt(K_y K_z) for the heavy species).
  trap.twist_coeff = 1e7;
  trap.reference_mass = fixtures::kBe.mass_kg();
  trap.cubic_scale = 230e-6;
  std::vector<IonSpecies> species{fixtures::kBe, fixtures::kMg};
  auto cfg = find_equilibrium(trap, species);

  MatX analytic = chain_hessian(trap, species, cfg.positions);
  MatX fd = oracles::fd_hessian(trap, species, cfg.positions);
  const double scale = analytic.cwiseAbs().maxCoeff();
  CHECK(((analytic - fd).cwiseAbs().maxCoeff() / scale) < 1e-6);
  CHECK((analytic - analytic.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("an unstable trap is rejected up front") {
  TrapModel trap = static_trap(5e6, 6e6, 1e6, fixtures::kBe.mass_kg());
  trap.static_coeff[1] *= -1.0;
  CHECK_THROWS_AS(find_equilibrium(trap, {fixtures::kBe}), InstabilityError);
}

TEST_CASE("relax returns a nearby minimum unchanged") {
  auto trap = fixtures::reference_trap();
  std::vector<IonSpecies> species{fixtures::kBe, fixtures::kMg};
  auto cfg = find_equilibrium(trap, species);

  SUBCASE("starting at the minimum") {
    auto again = relax(trap, species, cfg.positions);
    CHECK((again.positions - cfg.positions).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("starting from a small perturbation") {
    VecX start = cfg.positions;
    start[0] += 5e-9;
    start[5] -= 3e-9;
    auto again = relax(trap, species, start);
    CHECK((again.positions - cfg.positions).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("three equal-mass ions match the classic lattice positions") {
  // In units of the two-ion length scale l with l^3 = kc/(m w^2), the outer
  // ions of a three-ion chain sit at +-(5/4)^(1/3).
  IonSpecies be = fixtures::kBe;
  const double f = 2.0e6;
  TrapModel trap = static_trap(9e6, 10e6, f, be.mass_kg());
  auto cfg = find_equilibrium(trap, {be, be, be});
  const double w = k::two_pi * f;
  const double l =
      std::cbrt(k::unit_charge_coulomb / (be.mass_kg() * w * w));
  CHECK(cfg.positions[2] ==
        doctest::Approx(-std::cbrt(1.25) * l).epsilon(1e-10).scale(0.0));
  CHECK(std::abs(cfg.positions[5]) < 1e-15);
  CHECK(cfg.positions[8] ==
        doctest::Approx(std::cbrt(1.25) * l).epsilon(1e-10).scale(0.0));
}

TEST_CASE("axial gradient shifts the pair while preserving force balance") {
  auto trap = fixtures::reference_trap();
  trap.axial_gradient = 0.2 * k::elementary_charge;  // 0.2 eV/m
  trap.reference_mass = fixtures::kBe.mass_kg();
  std::vector<IonSpecies> species{fixtures::kBe, fixtures::kMg};
  auto cfg = find_equilibrium(trap, species);

  // Independent scalar force-balance oracle on the axial coordinates: with
  // the clamped reference trap the axial spring constant is b_z for both
  // species; the gradient force is -(m_ref/m) G.
  const double b_z = trap.static_coeff[2];
  const double G = trap.axial_gradient;
  auto bal = oracles::axial_force_balance(
      b_z, b_z, -G, -G * fixtures::kBe.mass_amu / fixtures::kMg.mass_amu, 0.0,
      4.8e-6);
  REQUIRE(bal.converged);
  CHECK(cfg.positions[2] == doctest::Approx(bal.z1).epsilon(1e-6).scale(0.0));
  CHECK(cfg.positions[5] == doctest::Approx(bal.z2).epsilon(1e-6).scale(0.0));
}
