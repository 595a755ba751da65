#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "shuttle/stochastic.hpp"

using Catch::Approx;
using namespace shuttle;

namespace {

const PhysicalSystem kOsc = in_oscillator_units(calcium_reference_system());
const double kT0 = 2.0 * std::numbers::pi;

}  // namespace

TEST_CASE("noiseless transport leaves the ion unexcited", "[stochastic]") {
  for (const auto& tr : {make_poly5(2 * kT0, kOsc.distance), make_cosine3(3 * kT0, kOsc.distance)}) {
    const auto s = integrate_noiseless(tr, 2000, kOsc);
    CHECK(s.rho == Approx(1.0).margin(1e-12));
    CHECK(std::abs(s.qc - kOsc.distance) < 1e-8);
    CHECK(excitation(s, kOsc) < 1e-12);
  }
}

TEST_CASE("RK4 converges at fourth order", "[stochastic]") {
  const auto tr = make_poly5(2 * kT0, 50.0);
  auto xi = [](double t) { return std::sin(0.7 * t) + 0.5 * std::cos(2.3 * t); };
  auto qc = [&](std::size_t n) { return integrate_auxiliary(tr, xi, n, 0.3, kOsc).qc; };
  const double ref = qc(16000);
  const double e1 = std::abs(qc(250) - ref), e2 = std::abs(qc(500) - ref);
  CHECK(e1 / e2 == Approx(16.0).epsilon(0.15));
}

TEST_CASE("small-lambda excitation matches the first-order kernels", "[stochastic]") {
  const double T = 3 * kT0;
  auto sys = kOsc;
  sys.distance = 40.0;
  const auto tr = make_poly5(T, sys.distance);
  auto xi = [](double t) { return std::cos(1.1 * t) + 0.3 * std::sin(2.0 * t + 0.4); };
  const std::size_t n = 6000;
  const double second = second_order_excitation(first_order_terms(tr, xi, n, sys), sys);
  REQUIRE(second > 0.0);
  for (double lambda : {1e-3, 1e-4}) {
    const double e = excitation(integrate_auxiliary(tr, xi, n, lambda, sys), sys);
    CHECK(e / (lambda * lambda) == Approx(second).epsilon(20 * lambda));
  }
}

TEST_CASE("static noise excites the breathing mode only", "[stochastic]") {
  // With d = 0 a constant frequency offset is a sudden quench and release.
  auto sys = kOsc;
  sys.distance = 0.0;
  const double T = 1.25 * kT0;
  const auto tr = make_poly5(T, 0.0);
  auto xi = [](double) { return 1.0; };
  const double lambda = 1e-4;
  const auto state = integrate_auxiliary(tr, xi, 4000, lambda, sys);
  CHECK(state.qc == 0.0);
  const double second = second_order_excitation(first_order_terms(tr, xi, 4000, sys), sys);
  // rho1(T) = -(1/2) int sin 2(T - s) ds = -(1 - cos 2T)/4 = -1/2 for T = 1.25 T0.
  CHECK(second == Approx(0.25).epsilon(1e-9));
  CHECK(excitation(state, sys) / (lambda * lambda) == Approx(second).epsilon(1e-3));
}

TEST_CASE("non-finite signals are reported", "[stochastic]") {
  const auto tr = make_poly5(kT0, 1.0);
  auto bad = [](double t) { return t > 1.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0; };
  CHECK_THROWS_AS(integrate_auxiliary(tr, bad, 100, 0.01, kOsc), NumericError);
  CHECK_THROWS_AS(integrate_noiseless(tr, 0, kOsc), InvalidParameter);
}

TEST_CASE("noise grid must span the transport", "[stochastic]") {
  const auto tr = make_poly5(kT0, 1.0);
  const auto path = sample_path(NoiseModel::ou(1.0), 2 * kT0, 0.05, 1, 1.0);
  CHECK_THROWS_AS(integrate_auxiliary(tr, path, 0.01, kOsc), InvalidParameter);
  CHECK_THROWS_AS(first_order_terms(tr, path, kOsc), InvalidParameter);
}

TEST_CASE("monte carlo ensemble agrees with the sensitivities", "[stochastic]") {
  const double T = 2 * kT0;
  const auto tr = make_poly5(T, kOsc.distance);
  const auto m = NoiseModel::ou(0.1 * kT0);
  const auto rep = run_monte_carlo(tr, m, 0.02, 400, 2024, kOsc, {0.0, 1, true});
  CHECK(rep.n_realizations == 400);
  CHECK(rep.n_failed == 0);
  CHECK(rep.samples.size() == 400);
  CHECK(rep.dt == Approx(max_noise_step(0.1 * kT0, 1.0)).epsilon(1e-3));
  CHECK(rep.g1 == Approx(g1_ou_exact(0.1 * kT0, T, kOsc)).epsilon(1e-7));
  CHECK(rep.g2 == Approx(g2_ou_exact_poly(0.1 * kT0, T, kOsc)).epsilon(1e-7));
  CHECK(rep.within_band());
  CHECK(rep.ratio == Approx(1.0).margin(0.2));
  CHECK(rep.min_excitation >= 0.0);
}

TEST_CASE("monte carlo results do not depend on the thread count", "[stochastic]") {
  const auto tr = make_cosine3(kT0, 30.0);
  const auto m = NoiseModel::flicker(0.05 * kT0, 0.5 * kT0);
  const auto a = run_monte_carlo(tr, m, 0.01, 120, 5, kOsc, {0.0, 1, true});
  const auto b = run_monte_carlo(tr, m, 0.01, 120, 5, kOsc, {0.0, 4, true});
  CHECK(a.mean_excitation == b.mean_excitation);
  CHECK(a.std_error == b.std_error);
  CHECK(a.samples == b.samples);
  const auto c = run_monte_carlo(tr, m, 0.01, 120, 6, kOsc, {0.0, 1, false});
  CHECK(c.mean_excitation != a.mean_excitation);
  CHECK(c.samples.empty());
}

TEST_CASE("monte carlo without noise", "[stochastic]") {
  const auto rep = run_monte_carlo(make_poly5(kT0, kOsc.distance), NoiseModel::ou(kT0), 0.0, 100, 1, kOsc);
  CHECK(rep.predicted == 0.0);
  CHECK(std::isnan(rep.ratio));
  CHECK(rep.mean_excitation < 1e-10);
  CHECK(rep.within_band());
}

TEST_CASE("monte carlo input validation", "[stochastic]") {
  const auto tr = make_poly5(kT0, 1.0);
  const auto m = NoiseModel::ou(kT0);
  CHECK_THROWS_AS(run_monte_carlo(tr, m, 0.06, 100, 1, kOsc), InvalidParameter);
  CHECK_THROWS_AS(run_monte_carlo(tr, m, -0.01, 100, 1, kOsc), InvalidParameter);
  CHECK_THROWS_AS(run_monte_carlo(tr, m, 0.01, 99, 1, kOsc), InvalidParameter);
  CHECK_THROWS_AS(run_monte_carlo(tr, m, 0.01, 100, 1, kOsc, {1.0, 1, false}), ResolutionError);
}

TEST_CASE("RK4 error slope under step halving", "[stochastic]") {
  auto sys = kOsc;
  sys.distance = 10.0;
  const auto tr = make_poly5(kT0, sys.distance);
  auto xi = [](double t) { return std::sin(t); };
  const auto ref = integrate_auxiliary(tr, xi, 64000, 0.5, sys);
  auto err = [&](std::size_t n) {
    const auto s = integrate_auxiliary(tr, xi, n, 0.5, sys);
    return std::hypot(s.rho - ref.rho, s.rho_dot - ref.rho_dot, s.qc - ref.qc) + std::abs(s.qc_dot - ref.qc_dot);
  };
  const double slope = std::log2(err(100) / err(800)) / 3.0;
  CHECK(slope >= 3.8);
}

TEST_CASE("ensemble energies stay above the ground level", "[stochastic][property]") {
  const auto tr = make_poly5(3 * kT0, kOsc.distance);
  const auto rep = run_monte_carlo(tr, NoiseModel::ou(0.5 * kT0), 0.05, 200, 77, kOsc, {0.0, 2, true});
  for (double e : rep.samples) CHECK(e >= -1e-9);
}

TEST_CASE("excitation is quadratic in lambda at fixed seeds", "[stochastic]") {
  const auto tr = make_poly5(2 * kT0, kOsc.distance);
  const auto m = NoiseModel::ou(0.2 * kT0);
  const auto a = run_monte_carlo(tr, m, 0.01, 300, 8, kOsc);
  const auto b = run_monte_carlo(tr, m, 0.005, 300, 8, kOsc);
  CHECK(b.mean_excitation == Approx(a.mean_excitation / 4).margin(3 * b.std_error));
}

TEST_CASE("stationary trap excitation is G1 alone", "[stochastic]") {
  auto sys = kOsc;
  sys.distance = 0.0;
  const auto tr = make_poly5(2 * kT0, 0.0);
  const auto rep = run_monte_carlo(tr, NoiseModel::ou(0.3 * kT0), 0.01, 1000, 4, sys);
  CHECK(rep.g2 == 0.0);
  CHECK(rep.within_band());
}
