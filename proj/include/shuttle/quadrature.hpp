#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "shuttle/errors.hpp"

namespace shuttle {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_panels = 200000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  int panels = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes kKronrodNodes[1], [3], [5] and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error, l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double resk = fc * kKronrodWeights[7];
  double resg = fc * kGaussWeights[3];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    f1[j] = f(centre - dx);
    f2[j] = f(centre + dx);
    resk += kKronrodWeights[j] * (f1[j] + f2[j]);
    resabs += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kGaussWeights[j / 2] * (f1[j] + f2[j]);
  }
  const double mean = 0.5 * resk;
  double resasc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double eps = std::numeric_limits<double>::epsilon();
  const double habs = std::abs(half);
  double err = std::abs((resk - resg) * half);
  resasc *= habs;
  resabs *= habs;
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return Panel{a, b, resk * half, err, resabs};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature over a partition.
///
/// `breakpoints` must be sorted and include both end points; every interval
/// between consecutive breakpoints starts as its own panel. The panel with the
/// largest error estimate is bisected until the summed estimate satisfies
/// max(abs_tol, rel_tol*|I|), or falls to the round-off floor of the
/// integrand's L1 norm. Placing breakpoints at the zeros of an oscillatory
/// factor keeps each panel free of sign changes.
template <class F>
QuadratureResult integrate(F&& f, std::span<const double> breakpoints, const QuadratureOptions& opt = {}) {
  if (breakpoints.size() < 2) throw InvalidParameter("integrate: need at least two breakpoints");
  std::priority_queue<detail::Panel> heap;
  QuadratureResult res;
  double value = 0.0, error = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    if (!(b >= a)) throw InvalidParameter("integrate: breakpoints must be sorted");
    if (b == a) continue;
    auto p = detail::kronrod15(f, a, b);
    res.evaluations += 15;
    value += p.value;
    error += p.error;
    l1 += p.l1;
    heap.push(p);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  auto converged = [&] {
    return error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) || error <= 100.0 * eps * l1;
  };
  while (!heap.empty() && !converged()) {
    if (static_cast<int>(heap.size()) >= opt.max_panels) {
      throw NumericError("adaptive quadrature did not converge: estimate " + std::to_string(value) +
                             " +/- " + std::to_string(error),
                         value, error);
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::kronrod15(f, worst.a, mid);
    auto right = detail::kronrod15(f, mid, worst.b);
    res.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the panels to drop the accumulated update round-off.
  res.panels = static_cast<int>(heap.size());
  value = 0.0;
  error = 0.0;
  std::vector<detail::Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& p : panels) {
    value += p.value;
    error += p.error;
  }
  if (!std::isfinite(value)) throw NumericError("quadrature produced a non-finite value", value, error);
  res.value = value;
  res.error = error;
  return res;
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  const std::array<double, 2> bp{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(bp), opt);
}

/// Sorted, de-duplicated partition of [a, b] containing `interior` points that
/// fall strictly inside.
inline std::vector<double> make_partition(double a, double b, std::vector<double> interior) {
  std::vector<double> pts;
  pts.reserve(interior.size() + 2);
  pts.push_back(a);
  std::sort(interior.begin(), interior.end());
  for (double x : interior)
    if (x > a && x < b && x > pts.back()) pts.push_back(x);
  pts.push_back(b);
  return pts;
}

/// Zeros of cos(omega s) in (a, b), i.e. omega s = pi/2 + k pi.
inline std::vector<double> cosine_zeros(double omega, double a, double b) {
  std::vector<double> z;
  if (!(omega > 0.0)) return z;
  const double pi = 3.14159265358979323846;
  const double first = std::ceil((omega * a - 0.5 * pi) / pi);
  for (double k = std::max(first, 0.0);; k += 1.0) {
    const double s = (0.5 * pi + k * pi) / omega;
    if (s >= b) break;
    if (s > a) z.push_back(s);
  }
  return z;
}

struct MinimizeResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Golden-section search for a minimum of a unimodal f on [lo, hi]; stops
/// when the bracket is narrower than x_tol.
template <class F>
MinimizeResult golden_section(F&& f, double lo, double hi, double x_tol, int max_iter = 500) {
  const double inv_phi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int it = 0;
  while (std::abs(b - a) > x_tol && it < max_iter) {
    ++it;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? MinimizeResult{x1, f1, it} : MinimizeResult{x2, f2, it};
}

}  // namespace shuttle
