#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "shuttle/parallel.hpp"
#include "shuttle/quadrature.hpp"
#include "shuttle/sensitivity.hpp"

namespace shuttle {

/// G1 + G2 and G1 - G2 for OU noise and the quintic trajectory, closed forms.
inline double ou_poly5_total(double tau, double T, const PhysicalSystem& sys) {
  return g1_ou_exact(tau, T, sys) + g2_ou_exact_poly(tau, T, sys);
}

struct CrossoverResult {
  double t_cross = 0.0;
  int roots = 0;  // sign changes of G1 - G2 seen in the bracket
};

struct OptimalTimeResult {
  double t_opt = 0.0;
  double g_min = 0.0;
  bool unimodal = true;  // false: best coarse-scan point returned
};

/// One row of the (tau, T) crossover table.
struct CrossoverPoint {
  double tau = 0.0;
  double t_cross = 0.0;
  double t_opt = 0.0;
  int roots = 0;
  bool unimodal = true;
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

inline constexpr int kScanPoints = 600;

}  // namespace detail

/// Smallest T in [T0, 500 T0] with G1(T) = G2(T) (OU noise, quintic).
inline CrossoverResult crossover_T(double tau, const PhysicalSystem& sys) {
  const double T0 = sys.period();
  const auto grid = detail::log_grid(T0, 500.0 * T0, detail::kScanPoints);
  auto h = [&](double T) { return g1_ou_exact(tau, T, sys) - g2_ou_exact_poly(tau, T, sys); };
  CrossoverResult res;
  double first_lo = 0.0, first_hi = 0.0;
  double prev = h(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = h(grid[i]);
    if ((prev < 0.0) != (cur < 0.0)) {
      if (res.roots == 0) {
        first_lo = grid[i - 1];
        first_hi = grid[i];
      }
      ++res.roots;
    }
    prev = cur;
  }
  if (res.roots == 0) throw NoCrossing("G1 - G2 does not change sign for T in [T0, 500 T0]");
  boost::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(h, first_lo, first_hi,
                                                        boost::math::tools::eps_tolerance<double>(50), max_iter);
  res.t_cross = 0.5 * (a + b);
  return res;
}

/// Root of the mid-tau approximation T + tau = a / T^3, a = 960 m d^2 / (7 hbar omega0^3).
inline double approximate_crossover_T(double tau, const PhysicalSystem& sys) {
  const double w = sys.omega0, d = sys.distance;
  const double a = 960.0 * sys.mass * d * d / (7.0 * sys.hbar * w * w * w);
  auto h = [&](double T) { return T * T * T * (T + tau) - a; };
  double hi = std::max(1.0, std::pow(a, 0.25));
  while (h(hi) < 0.0) hi *= 2.0;
  boost::uintmax_t max_iter = 200;
  const auto [lo_r, hi_r] =
      boost::math::tools::toms748_solve(h, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return 0.5 * (lo_r + hi_r);
}

/// Large-tau plateau of the optimal time, (2880 m d^2 / (7 hbar omega0^3))^(1/4).
inline double approximate_optimal_T(const PhysicalSystem& sys) {
  const double w = sys.omega0, d = sys.distance;
  return std::pow(2880.0 * sys.mass * d * d / (7.0 * sys.hbar * w * w * w), 0.25);
}

/// T in [T0, 500 T0] minimizing G1 + G2 (OU noise, quintic, closed forms).
inline OptimalTimeResult optimal_T(double tau, const PhysicalSystem& sys) {
  const double T0 = sys.period();
  const auto grid = detail::log_grid(T0, 500.0 * T0, detail::kScanPoints);
  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) g[i] = ou_poly5_total(tau, grid[i], sys);
  const auto best = static_cast<std::size_t>(std::min_element(g.begin(), g.end()) - g.begin());
  int local_minima = 0;
  for (std::size_t i = 1; i + 1 < g.size(); ++i)
    if (g[i] < g[i - 1] && g[i] < g[i + 1]) ++local_minima;

  OptimalTimeResult res;
  if (best == 0 || best + 1 == grid.size() || local_minima != 1) {
    res.t_opt = grid[best];
    res.g_min = g[best];
    res.unimodal = false;
    return res;
  }
  const auto m = golden_section([&](double T) { return ou_poly5_total(tau, T, sys); }, grid[best - 1],
                                grid[best + 1], 1e-7 * T0);
  res.t_opt = m.x;
  res.g_min = m.fx;
  return res;
}

struct CrossoverScan {
  std::vector<CrossoverPoint> points;
  /// Largest relative deviation between closed forms and quadrature over the
  /// random spot-check points.
  double spot_check_deviation = 0.0;
};

/// Crossover and optimal times over a list of correlation times. Each point
/// is independent; five seeded random (T, tau) points are re-evaluated by
/// quadrature to guard the closed forms.
inline CrossoverScan crossover_scan(const std::vector<double>& taus, const PhysicalSystem& sys,
                                    unsigned threads = default_thread_count(), std::uint64_t spot_seed = 1) {
  CrossoverScan scan;
  scan.points.resize(taus.size());
  parallel_for(taus.size(), threads, [&](std::size_t i) {
    CrossoverPoint p;
    p.tau = taus[i];
    const auto c = crossover_T(taus[i], sys);
    p.t_cross = c.t_cross;
    p.roots = c.roots;
    const auto o = optimal_T(taus[i], sys);
    p.t_opt = o.t_opt;
    p.unimodal = o.unimodal;
    scan.points[i] = p;
  });
  if (taus.empty()) return scan;
  std::mt19937_64 rng(spot_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double T0 = sys.period();
  const auto [tmin, tmax] = std::minmax_element(taus.begin(), taus.end());
  for (int k = 0; k < 5; ++k) {
    const double tau = *tmin * std::pow(*tmax / *tmin, unit(rng));
    const double T = T0 * std::pow(500.0, unit(rng));
    const auto model = NoiseModel::ou(tau);
    const auto traj = make_poly5(T, sys.distance);
    const double g1q = g1_quadrature(model, T, sys), g2q = g2_quadrature(model, traj, sys);
    const double g1e = g1_ou_exact(tau, T, sys), g2e = g2_ou_exact_poly(tau, T, sys);
    scan.spot_check_deviation = std::max({scan.spot_check_deviation, std::abs(g1q - g1e) / std::abs(g1e),
                                          std::abs(g2q - g2e) / std::abs(g2e)});
  }
  return scan;
}

struct N6Optimum {
  double n6 = 0.0;             // [length / time^6]
  double n6_normalized = 0.0;  // n6 T^6 / d
  double g2_min = 0.0;
  double g2_poly5 = 0.0;
  int expansions = 0;
};

/// G2 of the sextic trajectory with normalized free coefficient c6 = n6 T^6 / d.
inline double g2_poly6(double c6, double T, const NoiseModel& model, const PhysicalSystem& sys) {
  return g2_quadrature(model, Trajectory::poly6_normalized(T, sys.distance, c6), sys,
                       QuadratureOptions{1e-12, 0.0, 200000});
}

/// Minimizes G2 over the free sextic coefficient n6 by golden-section search
/// on n6 in [-B, B], B = 100 d / T^6 (OU noise).
inline N6Optimum optimize_n6(double T, double tau, const PhysicalSystem& sys) {
  const double T0 = sys.period();
  const double eps = 1e-9;
  if (!(T >= T0 * (1 - eps) && T <= 10.0 * T0 * (1 + eps)))
    throw InvalidParameter("optimize_n6: T must lie in [T0, 10 T0]");
  if (!(tau >= 1e-3 * T0 * (1 - eps) && tau <= 10.0 * T0 * (1 + eps)))
    throw InvalidParameter("optimize_n6: tau must lie in [1e-3 T0, 10 T0]");
  if (!(sys.distance > 0.0)) throw InvalidParameter("optimize_n6: distance must be positive");
  const auto model = NoiseModel::ou(tau);
  auto g2 = [&](double c6) { return g2_poly6(c6, T, model, sys); };

  N6Optimum res;
  double bound = 100.0;
  MinimizeResult m;
  for (;;) {
    m = golden_section(g2, -bound, bound, 1e-8 * bound);
    const bool at_edge = std::abs(m.x) > bound * (1.0 - 1e-6);
    if (!at_edge) break;
    if (res.expansions == 3) throw NumericError("optimize_n6: minimizer stays at the bracket edge", m.x);
    ++res.expansions;
    bound *= 10.0;
  }
  res.n6_normalized = m.x;
  res.n6 = m.x * sys.distance / std::pow(T, 6);
  res.g2_min = m.fx;
  res.g2_poly5 = g2_quadrature(model, make_poly5(T, sys.distance), sys, QuadratureOptions{1e-12, 0.0, 200000});
  return res;
}

}  // namespace shuttle
