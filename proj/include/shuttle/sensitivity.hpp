#pragma once

#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

#include "shuttle/noise.hpp"
#include "shuttle/quadrature.hpp"
#include "shuttle/trajectory.hpp"
#include "shuttle/units.hpp"

namespace shuttle {

enum class Method { Quadrature, OUExact, OUShortTau, OUMidTau, OULargeTau, FlickerFlat, FlickerPolyClosed };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Quadrature: return "quadrature";
    case Method::OUExact: return "ou-exact";
    case Method::OUShortTau: return "ou-short-tau";
    case Method::OUMidTau: return "ou-mid-tau";
    case Method::OULargeTau: return "ou-large-tau";
    case Method::FlickerFlat: return "flicker-flat";
    case Method::FlickerPolyClosed: return "flicker-poly-closed";
  }
  return "?";
}

/// Static (G1) and dynamical (G2) noise sensitivities. The mean excitation
/// after transport is lambda^2 (g1 + g2) to leading order.
struct Sensitivities {
  double g1 = 0.0;
  double g2 = 0.0;
  Method method = Method::Quadrature;

  double total() const { return g1 + g2; }
};

struct ExcitationPrediction {
  double lambda = 0.0;
  double e0 = 0.0;
  double delta_e = 0.0;
};

namespace detail {

// Breakpoints at tau * 2^j, j >= 0, for each correlation time of the model so
// the exponential decay near s = 0 is resolved before oscillation panels.
inline std::vector<double> decay_breakpoints(const NoiseModel& model, double T) {
  std::vector<double> pts;
  auto add = [&](double tau) {
    for (double s = tau / 16.0; s < T && s < 64.0 * tau; s *= 2.0) pts.push_back(s);
  };
  if (model.is_ou()) {
    add(model.as_ou().tau);
  } else {
    add(model.as_flicker().tau1);
    add(model.as_flicker().tau2);
  }
  return pts;
}

inline std::vector<double> oscillation_partition(const NoiseModel& model, double T, double omega) {
  auto interior = cosine_zeros(omega, 0.0, T);
  const auto decay = decay_breakpoints(model, T);
  interior.insert(interior.end(), decay.begin(), decay.end());
  return make_partition(0.0, T, std::move(interior));
}

// 6u cos(u/2) + (u^2 - 12) sin(u/2); the three terms cancel to O(u^5) for
// small u, where the Taylor series is summed instead.
inline double poly5_flat_bracket(double u) {
  if (std::abs(u) > 1.0) return 6.0 * u * std::cos(0.5 * u) + (u * u - 12.0) * std::sin(0.5 * u);
  // Coefficient of u^(2k+1): 6(-1)^k / (4^k (2k)!) + (-1)^(k-1) / (2^(2k-1) (2k-1)!)
  //                         - 12 (-1)^k / (2^(2k+1) (2k+1)!).
  double sum = 0.0;
  double fact2k = 1.0;  // (2k)!
  double pow2 = 1.0;    // 2^(2k)
  for (int k = 1; k < 12; ++k) {
    fact2k *= (2.0 * k - 1.0) * (2.0 * k);
    pow2 *= 4.0;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double c = 6.0 * sign / (pow2 * fact2k) - sign * 2.0 * (2.0 * k) / (pow2 * fact2k) -
                     12.0 * sign / (2.0 * pow2 * fact2k * (2.0 * k + 1.0));
    sum += c * std::pow(u, 2 * k + 1);
  }
  return sum;
}

inline void check_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InvalidParameter(std::string(what) + " must be positive");
}

}  // namespace detail

/// Acceleration autocorrelation of the reference trajectory,
/// f(s) = cos(omega0 s) * int_0^{T-s} qdd(u) qdd(u+s) du.
///
/// Closed polynomial form for Poly5; adaptive quadrature otherwise.
inline double f_autocorr(const Trajectory& traj, double s, double omega0) {
  const double T = traj.duration();
  if (!(s >= 0.0 && s <= T)) throw DomainError("f_autocorr: s outside [0, T]");
  const double d = traj.distance();
  if (traj.ansatz() == Ansatz::Poly5) {
    const double x = s / T;
    const double x2 = x * x;
    const double poly = 720.0 / 7.0 * x2 * x2 * x2 * x - 360.0 * x2 * x2 * x + 600.0 * x2 * x -
                        360.0 * x2 + 120.0 / 7.0;
    return d * d / (T * T * T) * poly * std::cos(omega0 * s);
  }
  if (s == T) return 0.0;
  auto integrand = [&](double u) { return traj.acceleration(u) * traj.acceleration(std::min(u + s, T)); };
  if (traj.ansatz() == Ansatz::Poly6) {
    // Degree-8 polynomial integrand: one 15-point Kronrod panel is exact.
    return std::cos(omega0 * s) * detail::kronrod15(integrand, 0.0, T - s).value;
  }
  // The inner integral can cancel to zero; bound the error absolutely by the
  // scale of int qdd^2 as well.
  const double scale = T * (d / (T * T)) * (d / (T * T)) * 100.0;
  const auto r = integrate(integrand, 0.0, T - s, QuadratureOptions{1e-11, 1e-14 * scale, 10000});
  return std::cos(omega0 * s) * r.value;
}

/// G1 = hbar omega0^3 (n + 1/2) int_0^T alpha(s) (T - s) cos(2 omega0 s) ds.
/// Independent of the trap trajectory.
inline double g1_quadrature(const NoiseModel& model, double T, const PhysicalSystem& sys,
                            const QuadratureOptions& opt = {}) {
  detail::check_positive(T, "T");
  const double w = sys.omega0;
  const auto pts = detail::oscillation_partition(model, T, 2.0 * w);
  const auto r = integrate([&](double s) { return model.alpha(s) * (T - s) * std::cos(2.0 * w * s); }, pts, opt);
  return sys.hbar * w * w * w * sys.level_factor() * r.value;
}

/// G2 = m int_0^T alpha(s) f(s) ds.
inline double g2_quadrature(const NoiseModel& model, const Trajectory& traj, const PhysicalSystem& sys,
                            const QuadratureOptions& opt = {}) {
  if (traj.distance() == 0.0) return 0.0;
  const double T = traj.duration();
  const auto pts = detail::oscillation_partition(model, T, sys.omega0);
  const auto r = integrate([&](double s) { return model.alpha(s) * f_autocorr(traj, s, sys.omega0); }, pts, opt);
  return sys.mass * r.value;
}

inline Sensitivities sensitivities_quadrature(const NoiseModel& model, const Trajectory& traj,
                                              const PhysicalSystem& sys) {
  return {g1_quadrature(model, traj.duration(), sys), g2_quadrature(model, traj, sys), Method::Quadrature};
}

/// Closed form of G1 for OU noise.
inline double g1_ou_exact(double tau, double T, const PhysicalSystem& sys) {
  detail::check_positive(tau, "tau");
  detail::check_positive(T, "T");
  const double w = sys.omega0;
  const double k = 4.0 * tau * tau * w * w;
  const double decay = std::exp(-T / tau);
  const double s = std::sin(w * T);
  // (k-1)[1 - e cos 2wT] rewritten with 1 - e = -expm1 and 1 - cos = 2 sin^2.
  const double brace = (k - 1.0) * (-std::expm1(-T / tau) + decay * 2.0 * s * s) -
                       decay * 4.0 * tau * w * std::sin(2.0 * w * T);
  const double M = tau / (2.0 * (1.0 + k) * (1.0 + k)) * brace;
  return sys.hbar * w * w * w * sys.level_factor() * (T / (2.0 * (1.0 + k)) + M);
}

/// Closed form of G2 for OU noise and the quintic trajectory.
///
/// The bracket M1 + e^{-T/tau}(M2 cos + M3 sin) is divided by (1 + X^2)^8
/// term by term: X^{2i} / (1+X^2)^8 = p^i q^{8-i} with p = X^2/(1+X^2),
/// q = 1/(1+X^2), so nothing overflows for large X = omega0 tau.
inline double g2_ou_exact_poly(double tau, double T, const PhysicalSystem& sys) {
  detail::check_positive(tau, "tau");
  detail::check_positive(T, "T");
  const double X = sys.omega0 * tau;
  const double X2 = X * X;
  const double p = X2 / (1.0 + X2);
  const double q = 1.0 / (1.0 + X2);
  double pw_p[9], pw_q[9];
  pw_p[0] = pw_q[0] = 1.0;
  for (int i = 1; i <= 8; ++i) {
    pw_p[i] = pw_p[i - 1] * p;
    pw_q[i] = pw_q[i - 1] * q;
  }
  // sum_i c_i X^{2i} / (1+X^2)^8
  auto poly = [&](std::initializer_list<double> c) {
    double acc = 0.0;
    int i = 0;
    for (double ci : c) {
      acc += ci * pw_p[i] * pw_q[8 - i];
      ++i;
    }
    return acc;
  };
  const double r = tau / T;
  const double r2 = r * r, r3 = r2 * r, r4 = r3 * r, r5 = r4 * r, r6 = r5 * r, r7 = r6 * r;

  const double m1 = r7 * poly({30240, -846720, 2116800, -846720, 30240}) +
                    r5 * poly({-2520, 32760, 35280, -35280, -32760, 2520}) +
                    r3 * poly({210, -420, -3570, -5880, -3570, -420, 210}) +
                    r2 * poly({-42, -84, 210, 840, 1050, 588, 126}) +
                    poly({1, 7, 21, 35, 35, 21, 7, 1});
  const double m2 = 210.0 * (r7 * poly({-144, 4032, -10080, 4032, -144}) +
                             r6 * poly({-144, 2880, -2016, -4032, 1008}) +
                             r5 * poly({-60, 780, 840, -840, -780, 60}) +
                             r4 * poly({-12, 84, 264, 168, -60, -60}) +
                             r3 * poly({-1, 2, 17, 28, 17, 2, -1}));
  const double m3 = 840.0 * X * (r7 * poly({288, -2016, 2016, -288}) +
                                 r6 * poly({252, -1008, -504, 720, -36}) +
                                 r5 * poly({90, -120, -420, -120, 90}) +
                                 r4 * poly({15, 15, -42, -66, -21, 3}) +
                                 r3 * poly({1, 3, 2, -2, -3, -1}));
  const double wT = sys.omega0 * T;
  const double bracket = m1 + std::exp(-T / tau) * (m2 * std::cos(wT) + m3 * std::sin(wT));
  const double d = sys.distance;
  return 60.0 * sys.mass * d * d / (7.0 * T * T * T) * bracket;
}

/// Large-tau limit of g2_ou_exact_poly (G2 proportional to 1/tau).
inline double g2_ou_large_tau_poly(double tau, double T, const PhysicalSystem& sys) {
  const double w = sys.omega0, u = w * T, d = sys.distance;
  const double b = detail::poly5_flat_bracket(u);
  return 3600.0 * sys.mass * d * d / (std::pow(T, 10) * std::pow(w, 8) * tau) * b * b;
}

/// (m/2) int_0^T qdd(u)^2 du, the white-noise value of G2.
inline double g2_white_noise(const Trajectory& traj, const PhysicalSystem& sys) {
  const double T = traj.duration();
  const auto r = integrate([&](double u) {
    const double a = traj.acceleration(u);
    return a * a;
  }, 0.0, T, QuadratureOptions{1e-12, 0.0, 10000});
  return 0.5 * sys.mass * r.value;
}

/// tau << T expansion (caller keeps tau <= T/10).
inline Sensitivities g_ou_short_tau(double tau, const Trajectory& traj, const PhysicalSystem& sys) {
  if (!(tau >= 0.0)) throw InvalidParameter("tau must be non-negative");
  const double w = sys.omega0, T = traj.duration();
  const double g1 = 0.5 * sys.hbar * w * w * w * sys.level_factor() * (T - tau);
  return {g1, g2_white_noise(traj, sys), Method::OUShortTau};
}

/// T >> tau >~ T0/(4 pi), quintic trajectory.
inline Sensitivities g_ou_mid_tau(double tau, double T, const PhysicalSystem& sys) {
  detail::check_positive(tau, "tau");
  detail::check_positive(T, "T");
  const double w = sys.omega0, d = sys.distance;
  const double g1 = sys.hbar * w * (T + tau) * sys.level_factor() / (8.0 * tau * tau);
  const double g2 = 60.0 * sys.mass * d * d / (7.0 * T * T * T * w * w * tau * tau);
  return {g1, g2, Method::OUMidTau};
}

/// tau >> T approximation of G1.
inline double g1_ou_large_tau(double tau, double T, const PhysicalSystem& sys) {
  detail::check_positive(tau, "tau");
  detail::check_positive(T, "T");
  const double w = sys.omega0;
  const double c = std::cos(w * T), s = std::sin(w * T);
  const double bracket = T * c * c + tau * s * s - s * c / w;
  return sys.hbar * w * w * w * sys.level_factor() * bracket / (4.0 * tau * tau * w * w);
}

/// alpha_f(0) = ln(tau2/tau1) / (2 (tau2 - tau1)).
inline double flicker_alpha0(double tau1, double tau2) { return NoiseModel::flicker(tau1, tau2).alpha(0.0); }

/// Flat-correlation approximation (tau1, tau2 >> T): alpha_f(t) ~ alpha_f(0).
inline Sensitivities g_flicker_flat(double tau1, double tau2, const Trajectory& traj, const PhysicalSystem& sys) {
  const double a0 = flicker_alpha0(tau1, tau2);
  const double w = sys.omega0, T = traj.duration();
  const double sn = std::sin(w * T);
  const double g1 = a0 * 0.5 * sys.hbar * w * sys.level_factor() * sn * sn;
  double g2 = 0.0;
  if (traj.distance() != 0.0) {
    const auto pts = make_partition(0.0, T, cosine_zeros(w, 0.0, T));
    const auto r = integrate([&](double s) { return f_autocorr(traj, s, w); }, pts,
                             QuadratureOptions{1e-11, 0.0, 200000});
    g2 = a0 * sys.mass * r.value;
  }
  return {g1, g2, Method::FlickerFlat};
}

/// Closed form of the flat-correlation G2 for the quintic trajectory.
inline double g2_flicker_poly_closed(double tau1, double tau2, double T, const PhysicalSystem& sys) {
  detail::check_positive(T, "T");
  const double a0 = flicker_alpha0(tau1, tau2);
  const double w = sys.omega0, u = w * T, d = sys.distance;
  const double b = detail::poly5_flat_bracket(u);
  return 7200.0 * a0 * sys.mass * d * d / (std::pow(w, 8) * std::pow(T, 10)) * b * b;
}

/// Long-time slope dG1/dT = pi omega0^2 S(2 omega0) E_n^(0) of a trap at rest.
inline double heating_rate_stationary(const NoiseModel& model, const PhysicalSystem& sys) {
  const double w = sys.omega0;
  return std::numbers::pi * w * w * model.spectrum(2.0 * w) * sys.ground_energy();
}

inline ExcitationPrediction predict_excitation(const Sensitivities& g, double lambda, const PhysicalSystem& sys) {
  if (!(lambda >= 0.0)) throw InvalidParameter("lambda must be non-negative");
  return {lambda, sys.ground_energy(), lambda * lambda * (g.g1 + g.g2)};
}

}  // namespace shuttle
