#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "shuttle/sensitivity.hpp"

using Catch::Approx;
using namespace shuttle;

namespace {

const PhysicalSystem kOsc = in_oscillator_units(calcium_reference_system());
const double kT0 = 2.0 * std::numbers::pi;

}  // namespace

TEST_CASE("reference sensitivities at tau = 0.1 T0, T = 5 T0", "[sensitivity]") {
  // 30-digit quadrature of the defining integrals.
  const double tau = 0.1 * kT0, T = 5 * kT0;
  const auto ou = NoiseModel::ou(tau);
  CHECK(g1_ou_exact(tau, T, kOsc) == Approx(3.058873668281035578).epsilon(1e-12));
  CHECK(g1_quadrature(ou, T, kOsc) == Approx(3.058873668281035578).epsilon(1e-8));
  CHECK(g2_ou_exact_poly(tau, T, kOsc) == Approx(86776.31639065614111).epsilon(1e-11));
  CHECK(g2_quadrature(ou, make_poly5(T, kOsc.distance), kOsc) == Approx(86776.31639065614111).epsilon(1e-8));
  CHECK(g2_quadrature(ou, make_cosine3(T, kOsc.distance), kOsc) == Approx(156119.025760095).epsilon(1e-8));
}

TEST_CASE("further reference values", "[sensitivity]") {
  CHECK(g1_ou_exact(kT0, 5 * kT0, kOsc) == Approx(0.05911736868997).epsilon(1e-11));
  CHECK(g2_ou_exact_poly(kT0, 5 * kT0, kOsc) == Approx(3447.39235569719).epsilon(1e-11));
  CHECK(g2_ou_exact_poly(1e-3 * kT0, kT0, kOsc) == Approx(15115275.54358588).epsilon(1e-11));
}

TEST_CASE("closed OU forms agree with quadrature", "[sensitivity][property]") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double tau = kT0 * std::pow(10.0, -3.0 + 5.0 * u(rng));
    const double T = kT0 * std::pow(10.0, 2.0 * u(rng));
    const auto m = NoiseModel::ou(tau);
    INFO("tau/T0=" << tau / kT0 << " T/T0=" << T / kT0);
    CHECK(g1_quadrature(m, T, kOsc) == Approx(g1_ou_exact(tau, T, kOsc)).epsilon(1e-7));
    CHECK(g2_quadrature(m, make_poly5(T, kOsc.distance), kOsc) ==
          Approx(g2_ou_exact_poly(tau, T, kOsc)).epsilon(1e-7));
  }
}

TEST_CASE("closed OU G2 does not overflow for very long correlation times", "[sensitivity]") {
  const double T = 5.1 * kT0;
  for (double tau : {1e8 * T, 1e12 * T, 1e20 * T}) {
    const double g2 = g2_ou_exact_poly(tau, T, kOsc);
    REQUIRE(std::isfinite(g2));
    CHECK(g2 == Approx(g2_ou_large_tau_poly(tau, T, kOsc)).epsilon(1e-6));
  }
}

TEST_CASE("short correlation time limit", "[sensitivity]") {
  const double T = 10 * kT0, tau = 1e-4 * kT0;
  const auto traj = make_poly5(T, kOsc.distance);
  const auto s = g_ou_short_tau(tau, traj, kOsc);
  CHECK(s.g1 == Approx(g1_ou_exact(tau, T, kOsc)).epsilon(1e-3));
  CHECK(s.g2 == Approx(g2_ou_exact_poly(tau, T, kOsc)).epsilon(1e-3));
  // (m/2) int qdd^2 = 60 d^2 / (7 T^3) for the quintic.
  CHECK(g2_white_noise(traj, kOsc) ==
        Approx(60.0 * kOsc.distance * kOsc.distance / (7.0 * T * T * T)).epsilon(1e-12));
  CHECK(s.method == Method::OUShortTau);
}

TEST_CASE("intermediate correlation time limit", "[sensitivity]") {
  // Corrections are O(tau / T) and O(1 / (omega0 tau)^2).
  const double tau = 4 * kT0, T = 2000 * kT0;
  const auto s = g_ou_mid_tau(tau, T, kOsc);
  CHECK(s.g1 == Approx(g1_ou_exact(tau, T, kOsc)).epsilon(0.01));
  CHECK(s.g2 == Approx(g2_ou_exact_poly(tau, T, kOsc)).epsilon(0.01));
}

TEST_CASE("long correlation time limit", "[sensitivity]") {
  const double T = 5.1 * kT0;
  CHECK(g1_ou_large_tau(100 * T, T, kOsc) == Approx(g1_ou_exact(100 * T, T, kOsc)).epsilon(1e-4));
  // First-order correction is about 13 T / tau here.
  CHECK(g2_ou_large_tau_poly(1e5 * kT0, T, kOsc) == Approx(g2_ou_exact_poly(1e5 * kT0, T, kOsc)).epsilon(1e-3));
}

TEST_CASE("quintic autocorrelation closed form matches quadrature", "[sensitivity]") {
  const double T = 3 * kT0;
  const auto p5 = make_poly5(T, 2.0);
  const auto p6 = make_poly6(T, 2.0, 0.0);  // same path, generic quadrature route
  for (double s : {0.0, 0.1, 1.0, 7.3, 12.0, T}) {
    CHECK(f_autocorr(p5, s, 1.0) == Approx(f_autocorr(p6, s, 1.0)).margin(1e-10 * std::abs(f_autocorr(p5, 0, 1))));
  }
  CHECK_THROWS_AS(f_autocorr(p5, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(f_autocorr(p5, T * 1.01, 1.0), DomainError);
}

TEST_CASE("flat flicker bracket", "[sensitivity]") {
  using detail::poly5_flat_bracket;
  auto direct = [](double u) { return 6.0 * u * std::cos(0.5 * u) + (u * u - 12.0) * std::sin(0.5 * u); };
  CHECK(poly5_flat_bracket(1.0) == Approx(direct(1.0)).epsilon(1e-12));
  CHECK(poly5_flat_bracket(0.999999) == Approx(direct(0.999999)).epsilon(1e-9));
  CHECK(poly5_flat_bracket(1e-3) == Approx(-1e-15 / 120.0).epsilon(1e-6));
  CHECK(poly5_flat_bracket(-0.5) == Approx(-poly5_flat_bracket(0.5)).epsilon(1e-15));
  CHECK(poly5_flat_bracket(0.0) == 0.0);
}

TEST_CASE("closed flat flicker G2 equals the flat quadrature", "[sensitivity]") {
  for (double T : {kT0, 2.5 * kT0, 10 * kT0}) {
    const auto s = g_flicker_flat(80 * kT0, 100 * kT0, make_poly5(T, kOsc.distance), kOsc);
    CHECK(g2_flicker_poly_closed(80 * kT0, 100 * kT0, T, kOsc) == Approx(s.g2).epsilon(1e-8));
  }
}

TEST_CASE("flicker G1 vanishes at half periods", "[sensitivity]") {
  const auto m = NoiseModel::flicker(80 * kT0, 100 * kT0);
  const double peak = flicker_alpha0(80 * kT0, 100 * kT0) * kOsc.ground_energy() / 2.0;
  // Residual from the decay of alpha over the transport, O(T / tau1).
  CHECK(g1_quadrature(m, 3 * std::numbers::pi, kOsc) < 0.03 * peak);
  CHECK(g1_quadrature(m, 3.5 * std::numbers::pi, kOsc) == Approx(peak).epsilon(0.01));
}

TEST_CASE("heating rate is the long-time slope of G1", "[sensitivity]") {
  for (double tau : {0.01 * kT0, kT0}) {
    const auto m = NoiseModel::ou(tau);
    const double slope = (g1_ou_exact(tau, 60 * kT0, kOsc) - g1_ou_exact(tau, 50 * kT0, kOsc)) / (10 * kT0);
    CHECK(slope == Approx(heating_rate_stationary(m, kOsc)).epsilon(1e-9));
  }
}

TEST_CASE("sensitivities scale as expected", "[sensitivity][property]") {
  const double tau = 0.3 * kT0, T = 4 * kT0;
  const auto m = NoiseModel::ou(tau);
  auto sys = kOsc;
  sys.distance = 2 * kOsc.distance;
  CHECK(g2_ou_exact_poly(tau, T, sys) == Approx(4 * g2_ou_exact_poly(tau, T, kOsc)).epsilon(1e-14));
  sys = kOsc;
  sys.mode = 3;
  CHECK(g1_quadrature(m, T, sys) == Approx(7 * g1_quadrature(m, T, kOsc)).epsilon(1e-12));
  sys.distance = 0.0;
  CHECK(g2_quadrature(m, make_poly5(T, 0.0), sys) == 0.0);
}

TEST_CASE("SI and oscillator-unit evaluations agree", "[sensitivity][property]") {
  const auto si = calcium_reference_system();
  const auto units = to_dimensionless(si);
  const double T0 = si.period();
  for (double tau_rel : {1e-2, 0.5, 20.0}) {
    const double tau = tau_rel * T0, T = 3 * T0;
    const auto m_si = NoiseModel::ou(tau);
    const auto m_osc = NoiseModel::ou(units.from_si_time(tau));
    const double g1_si = g1_quadrature(m_si, T, si);
    const double g1_osc = g1_quadrature(m_osc, units.from_si_time(T), kOsc);
    CHECK(units.to_si_sensitivity(g1_osc) == Approx(g1_si).epsilon(1e-8));
    const double g2_si = g2_ou_exact_poly(tau, T, si);
    const double g2_osc = g2_ou_exact_poly(units.from_si_time(tau), units.from_si_time(T), kOsc);
    CHECK(units.to_si_sensitivity(g2_osc) == Approx(g2_si).epsilon(1e-10));
  }
}

TEST_CASE("invalid sensitivity inputs", "[sensitivity]") {
  CHECK_THROWS_AS(g1_ou_exact(0.0, 1.0, kOsc), InvalidParameter);
  CHECK_THROWS_AS(g2_ou_exact_poly(1.0, -1.0, kOsc), InvalidParameter);
  CHECK_THROWS_AS(g1_quadrature(NoiseModel::ou(1.0), 0.0, kOsc), InvalidParameter);
  CHECK_THROWS_AS(predict_excitation({}, -0.1, kOsc), InvalidParameter);
  const auto p = predict_excitation({2.0, 3.0, Method::OUExact}, 0.1, kOsc);
  CHECK(p.delta_e == Approx(0.05));
  CHECK(p.e0 == 0.5);
  CHECK(to_string(Method::FlickerFlat) == "flicker-flat");
}
