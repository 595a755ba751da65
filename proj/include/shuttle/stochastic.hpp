#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "shuttle/energy.hpp"
#include "shuttle/noise.hpp"
#include "shuttle/parallel.hpp"
#include "shuttle/sensitivity.hpp"
#include "shuttle/trajectory.hpp"
#include "shuttle/units.hpp"

namespace shuttle {

/// First-order (in lambda) deviations of the auxiliary functions at t = T.
struct FirstOrderTerms {
  double rho1_T = 0.0;
  double rho1_dot_T = 0.0;
  double qc1_T = 0.0;
  double qc1_dot_T = 0.0;
};

namespace detail {

struct TrapSample {
  double offset;        // q_0(t) - q_c^(0)(t)
  double acceleration;  // qdd_c^(0)(t)
};

inline TrapSample trap_sample(const Trajectory& traj, double t, double omega0) {
  return {traj.trap_position(t, omega0) - traj.position(t), traj.acceleration(t)};
}

}  // namespace detail

/// Integrates the Ermakov and Newton equations
///   rho'' + w^2(t) rho = omega0^2 / rho^3,
///   qc''  + w^2(t) qc  = w^2(t) q_0(t),      w^2 = omega0^2 (1 + lambda xi(t)),
/// from rho = 1, qc = 0 (at rest) to t = T with `steps` classical RK4 steps.
///
/// The Newton equation is advanced for the deviation qc - q_c^(0)(t) from
/// the reference trajectory; the trap path q_0 still enters through its
/// offset from the reference, so an inconsistent trap path shows up as
/// excitation. `xi` is any callable t -> xi(t) on [0, T].
template <class Signal>
AuxiliaryState integrate_auxiliary(const Trajectory& traj, const Signal& xi, std::size_t steps, double lambda,
                                   const PhysicalSystem& sys) {
  if (steps == 0) throw InvalidParameter("integrate_auxiliary: need at least one step");
  const double T = traj.duration();
  const double w0 = sys.omega0;
  const double w02 = w0 * w0;
  const double K = static_cast<double>(steps);
  const double h = T / K;

  using State = std::array<double, 4>;  // rho, rho_dot, dq, dq_dot
  auto rhs = [&](const State& y, double noise, const detail::TrapSample& trap) {
    const double w2 = w02 * (1.0 + lambda * noise);
    const double r = y[0];
    return State{y[1], -w2 * r + w02 / (r * r * r), y[3],
                 w2 * trap.offset - trap.acceleration - w2 * y[2]};
  };
  auto axpy = [](const State& y, double a, const State& k) {
    return State{y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]};
  };

  State y{1.0, 0.0, 0.0, 0.0};
  auto trap0 = detail::trap_sample(traj, 0.0, w0);
  double xi0 = xi(0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double tm = T * ((static_cast<double>(k) + 0.5) / K);
    const double t1 = k + 1 == steps ? T : T * (static_cast<double>(k + 1) / K);
    const auto trapm = detail::trap_sample(traj, tm, w0);
    const auto trap1 = detail::trap_sample(traj, t1, w0);
    const double xim = xi(tm), xi1 = xi(t1);

    const State k1 = rhs(y, xi0, trap0);
    const State k2 = rhs(axpy(y, 0.5 * h, k1), xim, trapm);
    const State k3 = rhs(axpy(y, 0.5 * h, k2), xim, trapm);
    const State k4 = rhs(axpy(y, h, k3), xi1, trap1);
    for (int i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    if (!(y[0] > 0.0)) {
      if (std::isnan(y[0])) throw NumericError("integrate_auxiliary: NaN at t=" + std::to_string(t1));
      throw SingularState("integrate_auxiliary: rho <= 0 at t=" + std::to_string(t1), t1);
    }
    if (!std::isfinite(y[1]) || !std::isfinite(y[2]) || !std::isfinite(y[3]))
      throw NumericError("integrate_auxiliary: non-finite state at t=" + std::to_string(t1));
    trap0 = trap1;
    xi0 = xi1;
  }
  return AuxiliaryState{y[0], y[1], traj.position(T) + y[2], traj.velocity(T) + y[3]};
}

/// Integration on the grid of a sampled noise path (xi linearly interpolated).
inline AuxiliaryState integrate_auxiliary(const Trajectory& traj, const NoisePath& path, double lambda,
                                          const PhysicalSystem& sys) {
  const double T = traj.duration();
  if (path.steps() == 0 || std::abs(path.duration() - T) > 1e-9 * T)
    throw InvalidParameter("integrate_auxiliary: noise grid does not span [0, T]");
  return integrate_auxiliary(traj, path, path.steps(), lambda, sys);
}

/// Noiseless integration with `steps` RK4 steps.
inline AuxiliaryState integrate_noiseless(const Trajectory& traj, std::size_t steps, const PhysicalSystem& sys) {
  return integrate_auxiliary(traj, [](double) { return 0.0; }, steps, 0.0, sys);
}

/// First-order kernels at t = T:
///   rho1(T)  = -(omega0/2) int_0^T xi(s) sin 2 omega0 (T - s) ds,
///   qc1(T)   = (1/omega0)  int_0^T xi(s) sin omega0 (T - s) qdd(s) ds,
/// and their time derivatives, by composite Simpson on `steps` intervals.
template <class Signal>
FirstOrderTerms first_order_terms(const Trajectory& traj, const Signal& xi, std::size_t steps,
                                  const PhysicalSystem& sys) {
  if (steps == 0) throw InvalidParameter("first_order_terms: need at least one step");
  const double T = traj.duration();
  const double w = sys.omega0;
  const double K = static_cast<double>(steps);
  const double h = T / K;
  std::array<double, 4> acc{};
  auto add = [&](double t, double weight) {
    const double x = xi(t) * weight;
    const double a = traj.acceleration(t);
    const double lag = T - t;
    acc[0] += x * std::sin(2.0 * w * lag);
    acc[1] += x * std::cos(2.0 * w * lag);
    acc[2] += x * std::sin(w * lag) * a;
    acc[3] += x * std::cos(w * lag) * a;
  };
  for (std::size_t k = 0; k < steps; ++k) {
    const double t0 = T * (static_cast<double>(k) / K);
    const double tm = T * ((static_cast<double>(k) + 0.5) / K);
    const double t1 = k + 1 == steps ? T : T * (static_cast<double>(k + 1) / K);
    add(t0, 1.0);
    add(tm, 4.0);
    add(t1, 1.0);
  }
  for (double& v : acc) v *= h / 6.0;
  return FirstOrderTerms{-0.5 * w * acc[0], -w * w * acc[1], acc[2] / w, acc[3]};
}

inline FirstOrderTerms first_order_terms(const Trajectory& traj, const NoisePath& path, const PhysicalSystem& sys) {
  const double T = traj.duration();
  if (path.steps() == 0 || std::abs(path.duration() - T) > 1e-9 * T)
    throw InvalidParameter("first_order_terms: noise grid does not span [0, T]");
  return first_order_terms(traj, path, path.steps(), sys);
}

/// lambda^2-coefficient of the excitation built from the first-order terms.
inline double second_order_excitation(const FirstOrderTerms& f, const PhysicalSystem& sys) {
  const double w = sys.omega0;
  const double level = 2.0 * sys.mode + 1.0;
  return 0.5 * sys.mass * (w * w * f.qc1_T * f.qc1_T + f.qc1_dot_T * f.qc1_dot_T) +
         sys.hbar * w * level * f.rho1_T * f.rho1_T + 0.25 * sys.hbar / w * level * f.rho1_dot_T * f.rho1_dot_T;
}

struct MonteCarloOptions {
  double dt = 0.0;  // 0: min(tau_min / 20, T0 / 100)
  unsigned threads = default_thread_count();
  bool keep_samples = false;
};

struct MonteCarloReport {
  std::size_t n_realizations = 0;  // successful realizations
  std::size_t n_failed = 0;
  double lambda = 0.0;
  double mean_excitation = 0.0;
  double std_error = 0.0;
  double predicted = 0.0;  // lambda^2 (G1 + G2), quadrature
  double g1 = 0.0;
  double g2 = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t master_seed = 0;
  double dt = 0.0;
  std::size_t steps = 0;
  double min_excitation = 0.0;
  double roundoff_floor = 0.0;  // excitation attributable to integration error alone
  std::vector<double> samples;  // per-realization excitation (NaN if failed), if requested

  /// |mean - predicted| <= 3 stderr + rel_bias * predicted + roundoff_floor.
  bool within_band(double rel_bias = 0.05) const {
    return std::abs(mean_excitation - predicted) <= 3.0 * std_error + rel_bias * predicted + roundoff_floor;
  }
};

inline double default_monte_carlo_step(const NoiseModel& model, const PhysicalSystem& sys) {
  return max_noise_step(model.min_tau(), sys.omega0);
}

/// Ensemble average of the exact final excitation over N noise realizations.
///
/// Realization k (1-based) uses seed realization_seed(master_seed, k). Results
/// are stored per index and reduced in index order, so the report is
/// identical for any thread count. Realizations that hit a singular or
/// non-finite state are excluded; more than 1% failures aborts.
inline MonteCarloReport run_monte_carlo(const Trajectory& traj, const NoiseModel& model, double lambda,
                                        std::size_t N, std::uint64_t master_seed, const PhysicalSystem& sys,
                                        const MonteCarloOptions& opt = {}) {
  if (!(lambda >= 0.0 && lambda <= 0.05)) throw InvalidParameter("lambda must lie in [0, 0.05]");
  if (N < 100) throw InvalidParameter("at least 100 realizations are required");
  const double T = traj.duration();
  const double dt = opt.dt > 0.0 ? opt.dt : default_monte_carlo_step(model, sys);

  std::vector<double> excitation_k(N, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> steps_k(N, 0);
  parallel_for(N, opt.threads, [&](std::size_t i) {
    const auto path = sample_path(model, T, dt, realization_seed(master_seed, i + 1), sys.omega0);
    steps_k[i] = path.steps();
    try {
      const auto state = integrate_auxiliary(traj, path, lambda, sys);
      excitation_k[i] = excitation(state, sys);
    } catch (const SingularState&) {
    } catch (const NumericError&) {
    }
  });

  MonteCarloReport rep;
  rep.lambda = lambda;
  rep.master_seed = master_seed;
  rep.steps = steps_k.front();
  rep.dt = T / static_cast<double>(rep.steps);
  double sum = 0.0;
  rep.min_excitation = std::numeric_limits<double>::infinity();
  for (double x : excitation_k) {
    if (std::isnan(x)) {
      ++rep.n_failed;
      continue;
    }
    ++rep.n_realizations;
    sum += x;
    rep.min_excitation = std::min(rep.min_excitation, x);
  }
  if (rep.n_failed * 100 > N)
    throw NumericError("monte carlo: " + std::to_string(rep.n_failed) + " of " + std::to_string(N) +
                       " realizations failed");
  const double n = static_cast<double>(rep.n_realizations);
  rep.mean_excitation = sum / n;
  double ss = 0.0;
  for (double x : excitation_k)
    if (!std::isnan(x)) ss += (x - rep.mean_excitation) * (x - rep.mean_excitation);
  rep.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);

  rep.g1 = g1_quadrature(model, T, sys);
  rep.g2 = g2_quadrature(model, traj, sys);
  rep.predicted = lambda * lambda * (rep.g1 + rep.g2);
  rep.roundoff_floor = 1e-9 * sys.ground_energy();
  if (rep.predicted > 0.0) rep.ratio = rep.mean_excitation / rep.predicted;
  if (opt.keep_samples) rep.samples = std::move(excitation_k);
  return rep;
}

}  // namespace shuttle
