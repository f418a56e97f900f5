#include <doctest.h>

#include <cmath>
#include <random>

#include <ionsim/constants.hpp>
#include <ionsim/errors.hpp>
#include <ionsim/rates.hpp>

#include "support/fixtures.hpp"

using namespace ionsim;
namespace k = ionsim::constants;

namespace {

LaserField laser_with(double saturation, double detuning, double linewidth,
                      const Vec3& wavevector) {
  LaserField laser;
  laser.linewidth = linewidth;
  laser.rabi_frequency = linewidth * std::sqrt(saturation / 2.0);
  laser.detuning = detuning;
  laser.wavevector = wavevector;
  return laser;
}

// Single trapped ion with the axial mode as the lowest mode.
NormalModeSet single_ion_modes(const IonSpecies& ion, double axial_hz) {
  TrapModel trap;
  trap.rf_drive = k::two_pi * 100e6;
  const double m = ion.mass_kg();
  trap.static_coeff =
      Vec3(std::pow(k::two_pi * 8e6, 2), std::pow(k::two_pi * 9e6, 2),
           std::pow(k::two_pi * axial_hz, 2)) *
      m;
  return solve_modes(trap, {ion});
}

} // namespace

TEST_CASE("excited population matches the closed-form saturation curve") {
  const double g = k::two_pi * 20e6;
  CHECK(excited_population(laser_with(1.0, -g / 2.0, g, Vec3::Zero())) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12).scale(0.0));
  CHECK(excited_population(laser_with(2.0, 0.0, g, Vec3::Zero())) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12).scale(0.0));
  CHECK(excited_population(laser_with(1e8, 0.0, g, Vec3::Zero())) ==
        doctest::Approx(0.5).epsilon(1e-6).scale(0.0));

  SUBCASE("strictly increasing in s, maximized over detuning at zero") {
    double prev = 0.0;
    for (double s : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
      const double rho = excited_population(laser_with(s, 0.7 * g, g, {}));
      CHECK(rho > prev);
      prev = rho;
    }
    const double peak = excited_population(laser_with(1.0, 0.0, g, {}));
    for (double d : {-2.0, -0.5, -0.1, 0.1, 0.5, 2.0})
      CHECK(excited_population(laser_with(1.0, d * g, g, {})) < peak);
  }
  SUBCASE("nonpositive linewidth is rejected") {
    CHECK_THROWS_AS(excited_population(laser_with(1.0, 0.0, 0.0, {})),
                    std::invalid_argument);
  }
}

TEST_CASE("population slope agrees with a finite difference") {
  const double g = k::two_pi * 20e6;
  for (double d : {-1.3, -0.5, 0.0, 0.4, 2.0}) {
    const double delta = d * g;
    const double h = g * 1e-7;
    const double fd =
        (excited_population(laser_with(1.0, delta + h, g, {})) -
         excited_population(laser_with(1.0, delta - h, g, {}))) /
        (2.0 * h);
    const double analytic =
        excited_population_slope(laser_with(1.0, delta, g, {}));
    if (d == 0.0)
      CHECK(analytic == 0.0);
    else
      CHECK(analytic == doctest::Approx(fd).epsilon(1e-6).scale(0.0));
  }
}

TEST_CASE("doppler rate cools on red detuning and heats on blue") {
  auto modes = single_ion_modes(fixtures::kBe, 1e6);
  const double g = k::two_pi * 20e6;
  const Vec3 kz(0.0, 0.0, k::two_pi / 313e-9);

  CHECK(doppler_rate(modes, laser_with(1.0, 0.0, g, kz), 0, 0, 5.0) == 0.0);
  for (double d : {-4.9, -2.0, -1.0, -0.5, -0.01})
    CHECK(doppler_rate(modes, laser_with(1.0, d * g, g, kz), 0, 0, 5.0) < 0.0);
  for (double d : {0.01, 0.5, 1.0, 2.0, 4.9})
    CHECK(doppler_rate(modes, laser_with(1.0, d * g, g, kz), 0, 0, 5.0) > 0.0);

  SUBCASE("quadratic in the Lamb-Dicke projection") {
    const double r1 =
        doppler_rate(modes, laser_with(1.0, -g / 2.0, g, kz), 0, 0, 3.0);
    const double r2 =
        doppler_rate(modes, laser_with(1.0, -g / 2.0, g, 2.0 * kz), 0, 0, 3.0);
    CHECK(r2 == doctest::Approx(4.0 * r1).epsilon(1e-12).scale(0.0));
  }
  SUBCASE("orthogonal wavevector decouples") {
    const Vec3 kx(k::two_pi / 313e-9, 0.0, 0.0);
    CHECK(doppler_rate(modes, laser_with(1.0, -g / 2.0, g, kx), 0, 0, 3.0) ==
          0.0);
  }
}

TEST_CASE("recoil heating combines absorption and emission recoil") {
  auto modes = single_ion_modes(fixtures::kBe, 1e6);
  const double g = k::two_pi * 20e6;
  const double kmag = k::two_pi / 313e-9;
  const Vec3 kz(0.0, 0.0, kmag);
  const Vec3 kx(kmag, 0.0, 0.0);
  const LaserField along = laser_with(1.0, -g / 2.0, g, kz);
  const LaserField across = laser_with(1.0, -g / 2.0, g, kx);

  // k parallel to the mode: (1 + 2/5) eta^2 Gamma rho.
  const double eta = lamb_dicke(modes, kz, 0, 0);
  const double expected =
      1.4 * eta * eta * g * excited_population(along);
  CHECK(recoil_heating_rate(modes, along, 0, 0) ==
        doctest::Approx(expected).epsilon(1e-12).scale(0.0));

  // k orthogonal: only the spontaneous-emission term, 2/5 of the parallel
  // absorption scale.
  const double ortho = recoil_heating_rate(modes, across, 0, 0);
  CHECK(ortho == doctest::Approx((0.4 / 1.4) * expected).epsilon(1e-12).scale(0.0));
  CHECK(ortho > 0.0);
}

TEST_CASE("doppler equilibrium reproduces the weak-binding closed form") {
  // Gamma / omega = 20 at s = 1, Delta = -Gamma/2, k along the mode:
  // n_ss = (21/40) Gamma/omega - 1/2 exactly.
  auto modes = single_ion_modes(fixtures::kBe, 1e6);
  const double g = 20.0 * modes.frequencies[0];
  const Vec3 kz(0.0, 0.0, k::two_pi / 313e-9);
  const LaserField laser = laser_with(1.0, -g / 2.0, g, kz);

  const double nbar = doppler_equilibrium(modes, laser, 0, 0);
  CHECK(nbar == doctest::Approx(21.0 / 40.0 * 20.0 - 0.5).epsilon(1e-9));
  CHECK(nbar > 5.0);
  CHECK(nbar < 15.0);

  SUBCASE("equilibrium zeroes the net rate") {
    const double net = doppler_rate(modes, laser, 0, 0, nbar) +
                       recoil_heating_rate(modes, laser, 0, 0);
    const double scale = recoil_heating_rate(modes, laser, 0, 0);
    CHECK(std::abs(net) < 1e-9 * scale);
  }
  SUBCASE("independent of the mode participation magnitude") {
    // Scaling the eigenvector rescales cooling and heating identically, so
    // the balance point cannot move.
    NormalModeSet scaled = modes;
    scaled.eigenvectors.col(0) *= 0.5;
    CHECK(doppler_equilibrium(scaled, laser, 0, 0) ==
          doctest::Approx(nbar).epsilon(1e-6));
  }
  SUBCASE("low-saturation limit is insensitive to halving s") {
    const LaserField weak = laser_with(0.1, -g / 2.0, g, kz);
    const LaserField weaker = laser_with(0.05, -g / 2.0, g, kz);
    const double n1 = doppler_equilibrium(modes, weak, 0, 0);
    const double n2 = doppler_equilibrium(modes, weaker, 0, 0);
    CHECK(std::abs(n2 - n1) / n1 < 0.05);
  }
  SUBCASE("blue detuning is rejected") {
    CHECK_THROWS_AS(
        doppler_equilibrium(modes, laser_with(1.0, g / 2.0, g, kz), 0, 0),
        std::invalid_argument);
  }
}

TEST_CASE("two-ion doppler equilibrium matches the single-ion limit formula") {
  // For k along the mode axis the participation magnitude cancels from the
  // balance, so even a strongly asymmetric mode reaches the same limit.
  auto modes = solve_modes(fixtures::reference_trap(),
                           {fixtures::kBe, fixtures::kMg});
  const int axial_ip = 0;  // lowest mode of the reference chain
  const double omega = modes.frequencies[axial_ip];
  const double g = 20.0 * omega;
  const Vec3 kz(0.0, 0.0, k::two_pi / 313e-9);
  const LaserField laser = laser_with(1.0, -g / 2.0, g, kz);

  for (int ion : {0, 1}) {
    const double nbar = doppler_equilibrium(modes, laser, ion, axial_ip);
    CHECK(nbar == doctest::Approx(21.0 / 40.0 * 20.0 - 0.5).epsilon(1e-9));
  }
}

TEST_CASE("anomalous heating follows the weighted eigenvector projection") {
  namespace fx = fixtures;

  SUBCASE("single ion recovers q^2 S_E / (4 hbar omega m)") {
    auto modes = single_ion_modes(fx::kBe, 1.2e6);
    const double s_e = 4e-12;  // (V/m)^2/Hz
    FieldNoiseSpec noise;
    noise.direction = Vec3::UnitZ();
    noise.spectral_density = [=](double) { return s_e; };
    const double q = fx::kBe.charge_C();
    const double expected =
        q * q * s_e /
        (4.0 * k::hbar * modes.frequencies[0] * fx::kBe.mass_kg());
    CHECK(anomalous_heating_rate(modes, 0, noise) ==
          doctest::Approx(expected).epsilon(1e-12).scale(0.0));
  }

  SUBCASE("equal-mass out-of-phase mode decouples") {
    IonSpecies ca{"Ca", 40.0, 1};
    TrapModel trap;
    trap.rf_drive = k::two_pi * 100e6;
    trap.static_coeff =
        Vec3(std::pow(k::two_pi * 5e6, 2), std::pow(k::two_pi * 6e6, 2),
             std::pow(k::two_pi * 1e6, 2)) *
        ca.mass_kg();
    auto modes = solve_modes(trap, {ca, ca});
    FieldNoiseSpec noise;
    noise.direction = Vec3::UnitZ();
    noise.spectral_density = [](double) { return 4e-12; };
    // Mode 1 is the axial out-of-phase mode (sqrt(3) x the in-phase).
    CHECK(anomalous_heating_rate(modes, 1, noise) == 0.0);
    CHECK(anomalous_heating_rate(modes, 0, noise) > 0.0);
  }

  SUBCASE("mixed-species out-of-phase mode stays coupled") {
    auto modes = solve_modes(fx::reference_trap(), {fx::kBe, fx::kMg});
    FieldNoiseSpec noise;
    noise.direction = Vec3::UnitZ();
    noise.spectral_density = [](double) { return 4e-12; };
    CHECK(anomalous_heating_rate(modes, 1, noise) > 0.0);
  }

  SUBCASE("invariant under a global eigenvector sign flip") {
    auto modes = single_ion_modes(fx::kBe, 1.2e6);
    FieldNoiseSpec noise;
    noise.direction = Vec3::UnitZ();
    noise.spectral_density = [](double) { return 4e-12; };
    const double base = anomalous_heating_rate(modes, 0, noise);
    modes.eigenvectors.col(0) *= -1.0;
    CHECK(anomalous_heating_rate(modes, 0, noise) == base);
  }

  SUBCASE("tabulated densities interpolate and bound their domain") {
    auto modes = single_ion_modes(fx::kBe, 1.0e6);
    const double w = modes.frequencies[0];
    FieldNoiseSpec noise =
        tabulated_noise(Vec3::UnitZ(), {{0.5 * w, 2e-12}, {2.0 * w, 8e-12}});
    // Linear interpolation at w: 2 + 6 * (0.5/1.5) = 4.
    CHECK(noise.sample(w) == doctest::Approx(4e-12).epsilon(1e-12).scale(0.0));
    CHECK_THROWS_AS(noise.sample(3.0 * w), std::domain_error);

    FieldNoiseSpec empty;
    CHECK_THROWS_AS(anomalous_heating_rate(modes, 0, empty),
                    std::domain_error);
    FieldNoiseSpec negative;
    negative.direction = Vec3::UnitZ();
    negative.spectral_density = [](double) { return -1.0; };
    CHECK_THROWS_AS(anomalous_heating_rate(modes, 0, negative),
                    std::invalid_argument);
  }
}

TEST_CASE("radiation pressure force has the documented magnitude") {
  // Cycling transition at 397 nm, Gamma = 2 pi x 20 MHz, s = 1, half-line
  // red detuning.
  const double g = k::two_pi * 20e6;
  const Vec3 kvec(0.0, 0.0, k::two_pi / 397e-9);
  const LaserField laser = laser_with(1.0, -g / 2.0, g, kvec);
  const Vec3 f = radiation_pressure_force(laser);

  // Definitional identity |F| = hbar |k| Gamma rho_ee.
  CHECK(f.norm() == doctest::Approx(k::hbar * kvec.norm() * g *
                                    excited_population(laser))
                        .epsilon(1e-12)
                        .scale(0.0));
  // Documented magnitude band.
  CHECK(f.norm() > 0.8 * 3.4e-20);
  CHECK(f.norm() < 1.2 * 3.4e-20);
  // Vanishes with the drive.
  CHECK(radiation_pressure_force(laser_with(1e-30, -g / 2.0, g, kvec)).norm() <
        1e-40);
}

TEST_CASE("gate infidelity and its inverse occupation solve") {
  CHECK(gate_infidelity(0.25, 0.0) == 0.0);
  CHECK(gate_infidelity(0.25, 0.01) ==
        doctest::Approx(1.17e-4).epsilon(0.005).scale(0.0));

  SUBCASE("monotone in both arguments") {
    double prev = -1.0;
    for (double n : {0.0, 0.3, 1.0, 2.5}) {
      const double v = gate_infidelity(0.2, n);
      CHECK(v > prev);
      prev = v;
    }
    prev = -1.0;
    for (double eta : {0.01, 0.05, 0.1, 0.3}) {
      const double v = gate_infidelity(eta, 1.0);
      CHECK(v > prev);
      prev = v;
    }
  }
  SUBCASE("inverse solve round-trips") {
    for (double eta : {0.05, 0.18, 0.25}) {
      const double n = gate_nbar_for_infidelity(eta, 1e-4);
      CHECK(gate_infidelity(eta, n) ==
            doctest::Approx(1e-4).epsilon(1e-12).scale(0.0));
    }
    CHECK(gate_nbar_for_infidelity(0.05, 1e-4) ==
          doctest::Approx(1.88).epsilon(0.005).scale(0.0));
    CHECK(gate_nbar_for_infidelity(0.25, 1e-4) ==
          doctest::Approx(0.0086).epsilon(0.005).scale(0.0));
  }
}

TEST_CASE("thermal carrier reduction factor") {
  VecX eta1(1), n1(1);
  eta1 << 0.18;
  n1 << 17.0;
  CHECK(std::abs(carrier_rabi_factor(eta1, n1) - 0.433) <= 0.001);
  n1 << 0.0;
  CHECK(carrier_rabi_factor(eta1, n1) ==
        doctest::Approx(0.9838).epsilon(1e-3).scale(0.0));
  CHECK(carrier_rabi_factor(VecX::Zero(3), VecX::Constant(3, 9.0)) == 1.0);
  CHECK_THROWS_AS(carrier_rabi_factor(VecX::Zero(2), VecX::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("cooling report carries assumption warnings") {
  auto modes = single_ion_modes(fixtures::kBe, 1e6);
  const Vec3 kz(0.0, 0.0, k::two_pi / 313e-9);

  SUBCASE("broad line, red detuning: clean report with equilibrium") {
    const double g = 20.0 * modes.frequencies[0];
    auto report =
        cooling_report(modes, laser_with(1.0, -g / 2.0, g, kz), 0, 0, 1.0);
    CHECK(report.warnings.empty());
    CHECK(std::isfinite(report.equilibrium_n));
    CHECK(report.doppler_rate < 0.0);
    CHECK(report.recoil_rate > 0.0);
  }
  SUBCASE("narrow line draws a warning") {
    const double g = 2.0 * modes.frequencies[0];
    auto report =
        cooling_report(modes, laser_with(1.0, -g / 2.0, g, kz), 0, 0, 1.0);
    REQUIRE(report.warnings.size() >= 1);
    CHECK(report.warnings.front().find("five times") != std::string::npos);
  }
  SUBCASE("linewidth below the mode frequency is flagged hard") {
    const double g = 0.5 * modes.frequencies[0];
    auto report =
        cooling_report(modes, laser_with(1.0, -g / 2.0, g, kz), 0, 0, 1.0);
    REQUIRE(report.warnings.size() >= 1);
    CHECK(report.warnings.front().find("do not apply") != std::string::npos);
  }
  SUBCASE("blue detuning yields no equilibrium") {
    const double g = 20.0 * modes.frequencies[0];
    auto report =
        cooling_report(modes, laser_with(1.0, g / 2.0, g, kz), 0, 0, 1.0);
    CHECK(std::isnan(report.equilibrium_n));
  }
}
