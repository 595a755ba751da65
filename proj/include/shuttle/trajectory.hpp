#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "shuttle/errors.hpp"

namespace shuttle {

enum class Ansatz { Poly5, Cosine3, Poly6 };

inline std::string_view to_string(Ansatz a) {
  switch (a) {
    case Ansatz::Poly5: return "poly5";
    case Ansatz::Cosine3: return "cosine3";
    case Ansatz::Poly6: return "poly6";
  }
  return "?";
}

/// Reference centre-of-mass trajectory q_c(t) of a shortcut-to-adiabaticity
/// transport from 0 to d in time T.
///
/// q_c and its first two derivatives vanish at t = 0 and reach (d, 0, 0) at
/// t = T. Internally the trajectory is stored in the normalized variable
/// s = t/T with unit distance, q_c(t) = d * shape(s); physical coefficients are
/// reconstructed on demand. Immutable after construction.
class Trajectory {
 public:
  static Trajectory poly5(double duration, double distance) {
    return polynomial(Ansatz::Poly5, duration, distance, 0.0);
  }

  /// Sixth order polynomial with free leading coefficient n6 [length/time^6].
  static Trajectory poly6(double duration, double distance, double n6) {
    check_duration(duration);
    // Normalized leading coefficient: n6 * T^6 / d. For d = 0 the shape is
    // scaled by d anyway, so only the ratio matters.
    const double c6 = distance != 0.0 ? n6 * std::pow(duration, 6) / distance : 0.0;
    return polynomial(Ansatz::Poly6, duration, distance, c6);
  }

  /// Poly6 parameterized directly by the normalized coefficient n6*T^6/d.
  static Trajectory poly6_normalized(double duration, double distance, double c6) {
    return polynomial(Ansatz::Poly6, duration, distance, c6);
  }

  static Trajectory cosine3(double duration, double distance) {
    check_duration(duration);
    // Boundary conditions on d[b0 + b1 cos(pi s) + b2 cos(3 pi s)]:
    //   q(0) = 0, q(T) = d, qdd(0) = 0 (qdd(T) = 0 and qd(0) = qd(T) = 0 follow).
    Eigen::Matrix3d a;
    a << 1.0, 1.0, 1.0,    //
        1.0, -1.0, -1.0,   //
        0.0, 1.0, 9.0;
    const Eigen::Vector3d rhs(0.0, 1.0, 0.0);
    const Eigen::Vector3d b = a.partialPivLu().solve(rhs);
    Trajectory tr(Ansatz::Cosine3, duration, distance);
    tr.c_.assign(b.data(), b.data() + 3);
    return tr;
  }

  Ansatz ansatz() const { return ansatz_; }
  double duration() const { return T_; }
  double distance() const { return d_; }

  /// Normalized coefficients: c_k of shape(s) = sum c_k s^k for the polynomial
  /// families, (b0, b1, b2) for the cosine family.
  const std::vector<double>& normalized_coefficients() const { return c_; }

  /// Physical coefficients: beta_k = d c_k / T^k for polynomials (so that
  /// q_c(t) = sum beta_k t^k), (b0, b1, b2) for the cosine family.
  std::vector<double> coefficients() const {
    if (ansatz_ == Ansatz::Cosine3) return c_;
    std::vector<double> beta(c_.size());
    for (std::size_t k = 0; k < c_.size(); ++k)
      beta[k] = d_ * c_[k] / std::pow(T_, static_cast<double>(k));
    return beta;
  }

  /// q_c (order 0), its velocity (1) or acceleration (2) at time t in [0, T].
  double eval(double t, int order) const {
    if (!(t >= 0.0 && t <= T_))
      throw DomainError("trajectory evaluated at t=" + std::to_string(t) + " outside [0, " +
                        std::to_string(T_) + "]");
    return eval_unchecked(t, order);
  }

  double position(double t) const { return eval(t, 0); }
  double velocity(double t) const { return eval(t, 1); }
  double acceleration(double t) const { return eval(t, 2); }

  /// Trap centre q_0(t) = q_c(t) + qdd_c(t) / omega0^2 from the Newton equation.
  double trap_position(double t, double omega0) const {
    return eval(t, 0) + eval(t, 2) / (omega0 * omega0);
  }

  /// Shape function and derivatives in the normalized variable s in [0, 1].
  double shape(double s, int order) const {
    if (ansatz_ == Ansatz::Cosine3) {
      constexpr double pi = std::numbers::pi;
      const double c1 = c_[1], c2 = c_[2];
      switch (order) {
        case 0: return c_[0] + c1 * std::cos(pi * s) + c2 * std::cos(3.0 * pi * s);
        case 1: return -pi * (c1 * std::sin(pi * s) + 3.0 * c2 * std::sin(3.0 * pi * s));
        case 2: return -pi * pi * (c1 * std::cos(pi * s) + 9.0 * c2 * std::cos(3.0 * pi * s));
        default: break;
      }
      throw InvalidParameter("derivative order must be 0, 1 or 2");
    }
    if (order < 0 || order > 2) throw InvalidParameter("derivative order must be 0, 1 or 2");
    // Horner on the order-th derivative of sum c_k s^k.
    double acc = 0.0;
    for (int k = static_cast<int>(c_.size()) - 1; k >= order; --k) {
      double f = 1.0;
      for (int j = 0; j < order; ++j) f *= (k - j);
      acc = acc * s + f * c_[k];
    }
    return acc;
  }

 private:
  Trajectory(Ansatz a, double duration, double distance) : ansatz_(a), T_(duration), d_(distance) {}

  static void check_duration(double duration) {
    if (!(duration > 0.0) || !std::isfinite(duration))
      throw InvalidParameter("trajectory duration must be positive, got " + std::to_string(duration));
  }

  // Solves the six boundary conditions for c_0..c_5 with c_6 pinned.
  static Trajectory polynomial(Ansatz a, double duration, double distance, double c6) {
    check_duration(duration);
    using Mat6 = Eigen::Matrix<double, 6, 6>;
    using Vec6 = Eigen::Matrix<double, 6, 1>;
    Mat6 m = Mat6::Zero();
    Vec6 rhs = Vec6::Zero();
    // s = 0: value, first and second derivative.
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 2) = 2.0;
    // s = 1: value = 1, derivatives = 0.
    for (int k = 0; k < 6; ++k) {
      m(3, k) = 1.0;
      m(4, k) = k;
      m(5, k) = k * (k - 1.0);
    }
    rhs(3) = 1.0 - c6;
    rhs(4) = -6.0 * c6;
    rhs(5) = -30.0 * c6;
    const Vec6 c = m.fullPivLu().solve(rhs);
    Trajectory tr(a, duration, distance);
    tr.c_.assign(c.data(), c.data() + 6);
    if (a == Ansatz::Poly6) tr.c_.push_back(c6);
    return tr;
  }

  double eval_unchecked(double t, int order) const {
    const double s = t / T_;
    double scale = d_;
    for (int j = 0; j < order; ++j) scale /= T_;
    return scale * shape(s, order);
  }

  Ansatz ansatz_;
  double T_;
  double d_;
  std::vector<double> c_;
};

inline Trajectory make_poly5(double T, double d) { return Trajectory::poly5(T, d); }
inline Trajectory make_cosine3(double T, double d) { return Trajectory::cosine3(T, d); }
inline Trajectory make_poly6(double T, double d, double n6) { return Trajectory::poly6(T, d, n6); }

inline Trajectory make_trajectory(Ansatz a, double T, double d, double n6 = 0.0) {
  switch (a) {
    case Ansatz::Poly5: return make_poly5(T, d);
    case Ansatz::Cosine3: return make_cosine3(T, d);
    case Ansatz::Poly6: return make_poly6(T, d, n6);
  }
  throw InvalidParameter("unknown ansatz");
}

inline double eval(const Trajectory& traj, double t, int order) { return traj.eval(t, order); }

inline double trap_position(const Trajectory& traj, double t, double omega0) {
  return traj.trap_position(t, omega0);
}

}  // namespace shuttle
