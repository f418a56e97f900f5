#include <doctest.h>

#include <cmath>

#include <ionsim/constants.hpp>
#include <ionsim/errors.hpp>
#include <ionsim/scan.hpp>
#include <ionsim/shifts.hpp>

#include "support/fixtures.hpp"

using namespace ionsim;
namespace k = ionsim::constants;

namespace {

// Mode index moving dominantly along `axis`; `which` = 0 picks the lowest
// such mode, 1 the next, ...
int axis_mode(const NormalModeSet& modes, int axis, int which) {
  int seen = 0;
  for (int m = 0; m < static_cast<int>(modes.frequencies.size()); ++m) {
    double along = 0.0, total = 0.0;
    for (std::size_t j = 0; j < modes.config.species.size(); ++j) {
      const Vec3 e = modes.ion_component(static_cast<int>(j), m);
      along += e[axis] * e[axis];
      total += e.squaredNorm();
    }
    if (along > 0.5 * total && seen++ == which) return m;
  }
  REQUIRE(false);
  return -1;
}

} // namespace

TEST_CASE("field scan starts at the unperturbed spectrum and tracks branches") {
  auto trap = fixtures::reference_trap();
  std::vector<IonSpecies> pair{fixtures::kBe, fixtures::kMg};

  VecX grid(11);
  for (int i = 0; i < 11; ++i) grid[i] = 20.0 * i;  // 0 .. 200 V/m along y
  auto scan = scan_field(trap, pair, 1, grid);
  REQUIRE(scan.complete);
  REQUIRE(scan.points.size() == 11);

  auto base = solve_modes(trap, pair);
  for (int m = 0; m < 6; ++m)
    CHECK(scan.points[0].frequencies[m] ==
          doctest::Approx(base.frequencies[m]).epsilon(1e-12));

  // The branch that starts as the soft radial y mode ends at the shifted
  // frequency of the perturbed table; tracking must keep its identity even
  // though it approaches the axial branch.
  const int yoop = axis_mode(base, 1, 0);
  CHECK(scan.branch_frequency_hz(0, yoop) ==
        doctest::Approx(3.5265e6).epsilon(3e-3));
  CHECK(scan.branch_frequency_hz(10, yoop) / 1e6 ==
        doctest::Approx(3.42).epsilon(0.01 / 3.42).scale(0.0));

  SUBCASE("branches change smoothly") {
    for (int b = 0; b < 6; ++b)
      for (int i = 1; i < 11; ++i) {
        const double prev = scan.branch_frequency_hz(i - 1, b);
        const double curr = scan.branch_frequency_hz(i, b);
        CHECK(std::abs(curr - prev) < 0.05 * prev);
      }
  }
  SUBCASE("non-monotone grids are rejected") {
    VecX bad(3);
    bad << 0.0, 10.0, 5.0;
    CHECK_THROWS_AS(scan_field(trap, pair, 1, bad), std::invalid_argument);
  }
}

TEST_CASE("scan aborts with partial results when a point fails to relax") {
  // A strong cubic term tilted by an axial field loses its local minimum
  // beyond a critical field; the scan must return the converged prefix.
  IonSpecies be = fixtures::kBe;
  TrapModel trap;
  trap.rf_drive = k::two_pi * 100e6;
  trap.static_coeff =
      Vec3(std::pow(k::two_pi * 2e6, 2), std::pow(k::two_pi * 2.2e6, 2),
           std::pow(k::two_pi * 1e6, 2)) *
      be.mass_kg();
  trap.reference_mass = be.mass_kg();
  trap.cubic_scale = 20e-6;  // inflection ~7 um from centre

  VecX grid(5);
  grid << 0.0, 5.0, 10.0, 30.0, 40.0;  // V/m along z; critical ~12 V/m
  auto scan = scan_field(trap, {be}, 2, grid);
  CHECK_FALSE(scan.complete);
  CHECK(scan.failed_index == 3);
  CHECK(scan.points.size() == 3);
  CHECK(scan.branch_frequency_hz.rows() == 3);
  CHECK_FALSE(scan.failure.empty());
}

TEST_CASE("stray-field compensation recovers the injected field") {
  auto trap = fixtures::reference_trap();
  std::vector<IonSpecies> pair{fixtures::kBe, fixtures::kMg};

  SUBCASE("no stray field: estimate consistent with zero") {
    auto comp = compensate_stray_field(trap, pair, 1);
    CHECK(std::abs(comp.applied_field) <= 2.0);
  }
  SUBCASE("hidden 100 V/m is cancelled to within 2 V/m") {
    TrapModel with_stray = trap;
    with_stray.uniform_field[1] = 100.0;
    auto comp = compensate_stray_field(with_stray, pair, 1);
    CHECK(std::abs(comp.applied_field + 100.0) <= 2.0);
  }
  SUBCASE("monotone branch in range is an error") {
    // 400 V/m pushes the vertex outside the +-300 V/m window while the
    // window stays clear of the soft-mode dip near 800 V/m total field.
    TrapModel with_stray = trap;
    with_stray.uniform_field[1] = 400.0;
    CHECK_THROWS_AS(compensate_stray_field(with_stray, pair, 1),
                    std::domain_error);
  }
}

TEST_CASE("order swap shifts modes only through odd-in-z perturbations") {
  auto trap = fixtures::reference_trap();

  SUBCASE("clean trap: mirror symmetry to 1e-9 relative") {
    auto shift = order_dependent_shift(trap, fixtures::kBe, fixtures::kMg);
    for (int m = 0; m < 6; ++m)
      CHECK(std::abs(shift.delta_hz[m]) <
            1e-9 * shift.forward.frequency_hz(m));
  }
  SUBCASE("pseudopotential gradient shifts the axial out-of-phase mode") {
    TrapModel t = trap;
    t.axial_gradient = 0.2 * k::elementary_charge;  // 0.2 eV/m
    t.reference_mass = fixtures::kBe.mass_kg();
    auto shift = order_dependent_shift(t, fixtures::kBe, fixtures::kMg);
    const int oop = axis_mode(shift.forward, 2, 1);
    const double df = std::abs(shift.delta_hz[oop]);
    CHECK(df > 0.7 * 2.5e3);
    CHECK(df < 1.3 * 2.5e3);
  }
  SUBCASE("cubic axial term shifts the in-phase mode by tens of kHz") {
    TrapModel t = with_static_retuned(trap, fixtures::kBe,
                                      Vec3(12.26e6, 11.19e6, 2.7e6));
    t.reference_mass = fixtures::kBe.mass_kg();
    t.cubic_scale = 230e-6;
    auto shift = order_dependent_shift(t, fixtures::kBe, fixtures::kMg);
    const int ip = axis_mode(shift.forward, 2, 0);
    const double df = std::abs(shift.delta_hz[ip]);
    CHECK(df > 0.7 * 20e3);
    CHECK(df < 1.3 * 20e3);
  }
  SUBCASE("forces follow the species through the swap") {
    std::vector<Vec3> push{Vec3(0, 0, 2e-21), Vec3::Zero()};
    std::vector<Vec3> push_rev{Vec3::Zero(), Vec3(0, 0, 2e-21)};
    auto ab = order_dependent_shift(trap, fixtures::kBe, fixtures::kMg, push);
    auto ba =
        order_dependent_shift(trap, fixtures::kMg, fixtures::kBe, push_rev);
    // The swapped call runs the identical pair of solves in the other
    // order, so the deltas must flip sign bitwise.
    for (int m = 0; m < 6; ++m)
      CHECK(ab.delta_hz[m] == -ba.delta_hz[m]);
  }
}

TEST_CASE("force-displaced pair softens the out-of-phase mode") {
  IonSpecies ca{"Ca", 40.0, 1};
  TrapModel trap;
  trap.rf_drive = k::two_pi * 100e6;
  trap.static_coeff =
      Vec3(std::pow(k::two_pi * 5e6, 2), std::pow(k::two_pi * 5.5e6, 2),
           std::pow(k::two_pi * 1e6, 2)) *
      ca.mass_kg();
  auto cfg = find_equilibrium(trap, {ca, ca});

  SUBCASE("scattering-force displacement near 13 nm") {
    auto shift =
        radiation_pressure_displacement(trap, cfg, 1, Vec3(0, 0, 3.4e-20));
    CHECK(shift.analytic);
    CHECK(shift.epsilon > 0.8 * 13e-9);
    CHECK(shift.epsilon < 1.2 * 13e-9);
    // Force on the +z ion along +z stretches the pair: softening.
    CHECK(shift.factor ==
          doctest::Approx(1.0 - shift.epsilon / (2.0 * shift.spacing))
              .epsilon(1e-12)
              .scale(0.0));
    // Out-of-phase shift ~2 kHz for these parameters.
    const double f_oop = std::sqrt(3.0) * 1e6;
    const double df = f_oop * (1.0 - shift.factor);
    CHECK(df > 0.7 * 2e3);
    CHECK(df < 1.3 * 2e3);
  }
  SUBCASE("zero force gives factor one") {
    auto shift = radiation_pressure_displacement(trap, cfg, 0, Vec3::Zero());
    CHECK(shift.factor == 1.0);
    CHECK(shift.epsilon == 0.0);
  }
  SUBCASE("closed form agrees with rediagonalization at small stretch") {
    // eps/d ~ 4e-4 keeps the published first-order factor within 1e-4 of
    // the numerically exact ratio.
    const double d = (cfg.positions.segment<3>(3) - cfg.positions.head<3>())
                         .norm();
    const double target_eps = 4e-4 * d;
    const double f_mag =
        target_eps * ca.mass_kg() * std::pow(k::two_pi * 1e6, 2);
    const Vec3 force(0, 0, f_mag);
    auto shift = radiation_pressure_displacement(trap, cfg, 1, force);
    REQUIRE(shift.analytic);

    // Independent numeric ratio: re-relax with the force and rediagonalize.
    std::vector<Vec3> forces{Vec3::Zero(), force};
    EquilibriumOptions opts;
    opts.external_forces = forces;
    auto forced =
        normal_modes(trap, find_equilibrium(trap, {ca, ca}, cfg.positions,
                                            opts),
                     forces);
    auto base = normal_modes(trap, cfg);
    const int oop = axis_mode(base, 2, 1);
    const double numeric =
        forced.frequency_hz(oop) / base.frequency_hz(oop);
    CHECK(std::abs(shift.factor - numeric) < 1e-4 * numeric);
  }
  SUBCASE("unequal masses fall back to the numeric ratio") {
    auto mixed_trap = fixtures::reference_trap();
    auto mixed =
        find_equilibrium(mixed_trap, {fixtures::kBe, fixtures::kMg});
    auto up = radiation_pressure_displacement(mixed_trap, mixed, 1,
                                              Vec3(0, 0, 1e-20));
    auto down = radiation_pressure_displacement(mixed_trap, mixed, 1,
                                                Vec3(0, 0, -1e-20));
    CHECK_FALSE(up.analytic);
    CHECK(up.factor < 1.0);    // stretch softens
    CHECK(down.factor > 1.0);  // compression stiffens
  }
}
