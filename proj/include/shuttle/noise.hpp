#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "shuttle/errors.hpp"

namespace shuttle {

/// Exponential integral Ei(x) for x < 0.
///
/// Ei(x) = -E1(-x). For |x| <= 1 the convergent series
/// gamma + ln|x| + sum x^k / (k k!) is summed; beyond that E1 is evaluated by
/// its continued fraction (modified Lentz), which avoids the cancellation the
/// alternating series suffers at large |x|.
inline double expint_ei(double x) {
  if (!(x < 0.0)) throw DomainError("expint_ei: argument must be negative, got " + std::to_string(x));
  const double z = -x;
  const double eps = std::numeric_limits<double>::epsilon();
  if (z <= 1.0) {
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 100; ++k) {
      term *= x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return std::numbers::egamma + std::log(z) + sum;
  }
  const double tiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) return -h * std::exp(-z);
  }
  throw NumericError("expint_ei: continued fraction failed to converge", -h * std::exp(-z));
}

struct OrnsteinUhlenbeck {
  double tau;
};

/// Uniform mixture of OU processes with correlation times in [tau1, tau2].
struct Flicker {
  double tau1;
  double tau2;
};

/// Stationary, zero-mean noise xi(t) with correlation E[xi(t) xi(s)] = alpha(|t-s|).
class NoiseModel {
 public:
  static NoiseModel ou(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw InvalidParameter("OU correlation time must be positive, got " + std::to_string(tau));
    return NoiseModel(OrnsteinUhlenbeck{tau});
  }
  static NoiseModel flicker(double tau1, double tau2) {
    if (!(tau1 > 0.0) || !(tau2 > tau1) || !std::isfinite(tau2))
      throw InvalidParameter("flicker noise needs 0 < tau1 < tau2");
    return NoiseModel(Flicker{tau1, tau2});
  }

  bool is_ou() const { return std::holds_alternative<OrnsteinUhlenbeck>(v_); }
  bool is_flicker() const { return std::holds_alternative<Flicker>(v_); }
  const OrnsteinUhlenbeck& as_ou() const { return std::get<OrnsteinUhlenbeck>(v_); }
  const Flicker& as_flicker() const { return std::get<Flicker>(v_); }

  /// Smallest correlation time the model can produce.
  double min_tau() const { return is_ou() ? as_ou().tau : as_flicker().tau1; }

  /// Correlation function alpha(t), t >= 0.
  double alpha(double t) const {
    if (!(t >= 0.0)) throw DomainError("alpha: lag must be non-negative, got " + std::to_string(t));
    if (is_ou()) {
      const double tau = as_ou().tau;
      return std::exp(-t / tau) / (2.0 * tau);
    }
    const auto [t1, t2] = as_flicker();
    const double width = t2 - t1;
    if (t == 0.0) return std::log1p(width / t1) / (2.0 * width);
    if (width < 1e-4 * t1) return narrow_mixture_alpha(t, t1, t2);
    return (expint_ei(-t / t1) - expint_ei(-t / t2)) / (2.0 * width);
  }

  /// Spectral density S(Omega) = (1/pi) int_0^inf alpha(t) cos(Omega t) dt.
  double spectrum(double omega) const {
    if (!(omega >= 0.0)) throw DomainError("spectrum: frequency must be non-negative");
    constexpr double pi = std::numbers::pi;
    if (is_ou()) {
      const double x = as_ou().tau * omega;
      return 1.0 / (2.0 * pi * (1.0 + x * x));
    }
    const auto [t1, t2] = as_flicker();
    // acot(t1 W) - acot(t2 W) = atan((t2 - t1) W / (1 + t1 t2 W^2)).
    const double den = 1.0 + t1 * t2 * omega * omega;
    const double y = (t2 - t1) * omega / den;
    const double atan_ratio = std::abs(y) < 1e-4 ? 1.0 - y * y / 3.0 + y * y * y * y / 5.0 : std::atan(y) / y;
    return atan_ratio / (2.0 * pi * den);
  }

 private:
  explicit NoiseModel(std::variant<OrnsteinUhlenbeck, Flicker> v) : v_(v) {}

  // For nearly degenerate intervals the Ei difference cancels; average the OU
  // correlation over tau directly with 8-point Gauss-Legendre instead.
  static double narrow_mixture_alpha(double t, double t1, double t2) {
    static constexpr std::array<double, 4> x = {0.1834346424956498, 0.5255324099163290,
                                                0.7966664774136267, 0.9602898564975363};
    static constexpr std::array<double, 4> w = {0.3626837833783620, 0.3137066458778873,
                                                0.2223810344533745, 0.1012285362903763};
    const double c = 0.5 * (t1 + t2), h = 0.5 * (t2 - t1);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
      for (double sgn : {-1.0, 1.0}) {
        const double tau = c + sgn * h * x[i];
        sum += w[i] * std::exp(-t / tau) / (2.0 * tau);
      }
    return 0.5 * sum;
  }

  std::variant<OrnsteinUhlenbeck, Flicker> v_;
};

/// One realization of xi on the uniform grid t_k = k dt, k = 0..K.
struct NoisePath {
  double dt = 0.0;
  std::vector<double> samples;
  std::uint64_t seed = 0;
  double tau_drawn = 0.0;

  std::size_t steps() const { return samples.empty() ? 0 : samples.size() - 1; }
  double duration() const { return dt * static_cast<double>(steps()); }

  /// Piecewise-linear interpolation between grid nodes.
  double operator()(double t) const {
    const double u = t / dt;
    const auto k = static_cast<std::size_t>(std::floor(u));
    if (k >= steps()) return samples.back();
    const double frac = u - static_cast<double>(k);
    return samples[k] + frac * (samples[k + 1] - samples[k]);
  }
};

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of realization `index` in an ensemble. Depends only on the pair, so
/// ensembles can be evaluated in any order or in parallel.
inline std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Standard normal variates from a seeded mt19937_64 via the Box-Muller
/// transform. The mapping from engine output to variates is fixed here rather
/// than delegated to std::normal_distribution, whose algorithm is
/// implementation-defined.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1], 53 random bits.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Largest grid step accepted for a process with correlation time tau in a
/// trap of angular frequency omega0.
inline double max_noise_step(double tau, double omega0) {
  return std::min(tau / 20.0, 2.0 * std::numbers::pi / omega0 / 100.0);
}

/// Draws xi on [0, T] with step dt.
///
/// OU paths use the exact one-step transition, so grid covariances equal
/// alpha(|t_i - t_j|) exactly; xi(0) comes from the stationary law. Flicker
/// paths first draw tau uniformly in [tau1, tau2] from the same stream.
/// The step is shrunk to T / ceil(T / dt) so the grid ends exactly at T.
inline NoisePath sample_path(const NoiseModel& model, double T, double dt, std::uint64_t seed,
                             double omega0) {
  if (!(T > 0.0)) throw InvalidParameter("sample_path: T must be positive");
  if (!(dt > 0.0)) throw InvalidParameter("sample_path: dt must be positive");
  if (!(omega0 > 0.0)) throw InvalidParameter("sample_path: omega0 must be positive");
  const double period = 2.0 * std::numbers::pi / omega0;
  if (model.min_tau() < 1e-3 * period * (1.0 - 1e-12))
    throw InvalidParameter("sample_path: correlation times below 1e-3 T0 are not supported");
  const double steps_real = std::ceil(T / dt * (1.0 - 1e-12));
  if (steps_real > 1e8) throw ResolutionError("sample_path: T/dt exceeds 1e8 grid steps");
  const auto K = static_cast<std::size_t>(std::max(1.0, steps_real));

  GaussianStream normal(seed);
  NoisePath path;
  path.seed = seed;
  path.dt = T / static_cast<double>(K);
  if (model.is_ou()) {
    path.tau_drawn = model.as_ou().tau;
  } else {
    const auto [t1, t2] = model.as_flicker();
    path.tau_drawn = t1 + (t2 - t1) * (1.0 - normal.uniform());
  }
  const double tau = path.tau_drawn;
  if (path.dt > tau / 20.0 * (1.0 + 1e-12))
    throw ResolutionError("sample_path: dt=" + std::to_string(dt) + " exceeds tau/20=" +
                          std::to_string(tau / 20.0) + " (correlation time bound)");
  if (path.dt > period / 100.0 * (1.0 + 1e-12))
    throw ResolutionError("sample_path: dt=" + std::to_string(dt) + " exceeds T0/100=" +
                          std::to_string(period / 100.0) + " (trap period bound)");

  const double decay = std::exp(-path.dt / tau);
  const double kick = std::sqrt(-std::expm1(-2.0 * path.dt / tau) / (2.0 * tau));
  path.samples.resize(K + 1);
  double xi = normal() / std::sqrt(2.0 * tau);
  path.samples[0] = xi;
  for (std::size_t k = 1; k <= K; ++k) {
    xi = xi * decay + kick * normal();
    path.samples[k] = xi;
  }
  return path;
}

}  // namespace shuttle
