#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "shuttle/trajectory.hpp"

using Catch::Approx;
using namespace shuttle;

namespace {

void check_boundaries(const Trajectory& tr) {
  const double T = tr.duration(), d = tr.distance();
  const double vs = d / T, as = d / (T * T);
  CHECK(std::abs(tr.position(0.0)) <= 1e-10 * d);
  CHECK(std::abs(tr.velocity(0.0)) <= 1e-10 * vs);
  CHECK(std::abs(tr.acceleration(0.0)) <= 1e-10 * as);
  CHECK(std::abs(tr.position(T) - d) <= 1e-10 * d);
  CHECK(std::abs(tr.velocity(T)) <= 1e-10 * vs);
  CHECK(std::abs(tr.acceleration(T)) <= 1e-10 * as);
}

}  // namespace

TEST_CASE("quintic midpoint values", "[trajectory]") {
  const double T = 31.4, d = 20915.53;
  const auto tr = make_poly5(T, d);
  CHECK(tr.position(T / 2) == Approx(d / 2).epsilon(1e-13));
  CHECK(tr.velocity(T / 2) == Approx(15.0 * d / (8.0 * T)).epsilon(1e-13));
  CHECK(std::abs(tr.acceleration(T / 2)) <= 1e-12 * d / (T * T));
  check_boundaries(tr);
}

TEST_CASE("quintic normalized coefficients are 10, -15, 6", "[trajectory]") {
  const auto tr = make_poly5(2.0, 3.0);
  const auto& c = tr.normalized_coefficients();
  REQUIRE(c.size() == 6);
  CHECK(std::abs(c[0]) < 1e-14);
  CHECK(std::abs(c[1]) < 1e-14);
  CHECK(std::abs(c[2]) < 1e-14);
  CHECK(c[3] == Approx(10.0).epsilon(1e-13));
  CHECK(c[4] == Approx(-15.0).epsilon(1e-13));
  CHECK(c[5] == Approx(6.0).epsilon(1e-13));
}

TEST_CASE("physical coefficients reproduce the position", "[trajectory]") {
  const double T = 7.0, d = 2.5;
  const auto tr = make_poly6(T, d, 1e-5);
  const auto beta = tr.coefficients();
  for (double t : {0.3, 1.7, 4.2, 6.9}) {
    double q = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) q += beta[k] * std::pow(t, static_cast<double>(k));
    CHECK(q == Approx(tr.position(t)).epsilon(1e-11));
  }
  CHECK(beta[6] == Approx(1e-5).epsilon(1e-13));
}

TEST_CASE("cosine trajectory coefficients", "[trajectory]") {
  const auto tr = make_cosine3(10.0, 4.0);
  const auto& b = tr.normalized_coefficients();
  REQUIRE(b.size() == 3);
  CHECK(b[0] == Approx(0.5).epsilon(1e-14));
  CHECK(b[1] == Approx(-9.0 / 16.0).epsilon(1e-14));
  CHECK(b[2] == Approx(1.0 / 16.0).epsilon(1e-14));
  check_boundaries(tr);
  CHECK(tr.position(5.0) == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("sextic with zero free coefficient equals the quintic", "[trajectory]") {
  const double T = 12.0, d = 100.0;
  const auto p5 = make_poly5(T, d);
  const auto p6 = make_poly6(T, d, 0.0);
  for (int i = 0; i <= 50; ++i) {
    const double t = T * i / 50.0;
    for (int o = 0; o < 3; ++o) CHECK(p6.eval(t, o) == Approx(p5.eval(t, o)).margin(1e-12 * d / std::pow(T, o)));
  }
}

TEST_CASE("boundary conditions hold for random sextics", "[trajectory][property]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double T = std::pow(10.0, 2.0 * u(rng));
    const double d = std::pow(10.0, 4.0 * u(rng));
    check_boundaries(Trajectory::poly6_normalized(T, d, 100.0 * u(rng)));
  }
}

TEST_CASE("derivatives agree with finite differences", "[trajectory][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const double T = 9.0, d = 3.0;
  for (const auto& tr : {make_poly5(T, d), make_cosine3(T, d), make_poly6(T, d, 2e-6)}) {
    for (int i = 0; i < 50; ++i) {
      const double t = T * u(rng), h = 1e-4;
      const double dq = (tr.position(t + h) - tr.position(t - h)) / (2 * h);
      const double dv = (tr.velocity(t + h) - tr.velocity(t - h)) / (2 * h);
      CHECK(dq == Approx(tr.velocity(t)).margin(1e-6 * d / T));
      CHECK(dv == Approx(tr.acceleration(t)).margin(1e-6 * d / (T * T)));
    }
  }
}

TEST_CASE("time scaling covariance", "[trajectory][property]") {
  // q_c(t; T, d) = d shape(t / T): rescaling T and d maps derivatives by d / T^k.
  const auto a = make_poly5(2.0, 1.0);
  const auto b = make_poly5(6.0, 5.0);
  for (double s : {0.1, 0.37, 0.5, 0.81}) {
    CHECK(b.position(6.0 * s) == Approx(5.0 * a.position(2.0 * s)).epsilon(1e-13));
    CHECK(b.velocity(6.0 * s) == Approx(5.0 / 3.0 * a.velocity(2.0 * s)).epsilon(1e-13));
    CHECK(b.acceleration(6.0 * s) == Approx(5.0 / 9.0 * a.acceleration(2.0 * s)).epsilon(1e-12));
  }
}

TEST_CASE("trap position includes the inertial offset", "[trajectory]") {
  const auto tr = make_poly5(5.0, 2.0);
  const double w = 2.0;
  for (double t : {0.0, 1.0, 2.5, 4.0, 5.0})
    CHECK(trap_position(tr, t, w) == Approx(tr.position(t) + tr.acceleration(t) / (w * w)).epsilon(1e-15));
}

TEST_CASE("invalid inputs", "[trajectory]") {
  const auto tr = make_poly5(1.0, 1.0);
  CHECK_THROWS_AS(tr.position(-1e-9), DomainError);
  CHECK_THROWS_AS(tr.position(1.0 + 1e-9), DomainError);
  CHECK_THROWS_AS(tr.eval(0.5, 3), InvalidParameter);
  CHECK_THROWS_AS(make_poly5(0.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(make_cosine3(-1.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(make_poly6(std::nan(""), 1.0, 0.0), InvalidParameter);
  CHECK(to_string(Ansatz::Cosine3) == "cosine3");
}

TEST_CASE("zero distance gives a resting trajectory", "[trajectory]") {
  const auto tr = make_trajectory(Ansatz::Poly6, 3.0, 0.0, 1.0);
  for (double t : {0.0, 1.0, 3.0}) {
    CHECK(tr.position(t) == 0.0);
    CHECK(tr.acceleration(t) == 0.0);
  }
}
