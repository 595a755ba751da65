// Command line front end: sensitivities, Monte Carlo checks and scans as CSV/JSON.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "run_config.hpp"
#include "shuttle/shuttle.hpp"

#ifndef SHUTTLE_VERSION
#define SHUTTLE_VERSION "unknown"
#endif

namespace {

using cli::ConfigError;
using cli::Format;
using cli::RunConfig;
using nlohmann::json;

constexpr int kExitOutOfBand = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string generator() { return std::string("shuttle_cli ") + SHUTTLE_VERSION + " (" + __VERSION__ + ")"; }

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json meta = json::object();
};

std::string csv_cell(const json& c) {
  if (c.is_number_float()) return format_double(c.get<double>());
  if (c.is_number()) return c.dump();
  if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
  if (c.is_null()) return "";
  return c.get<std::string>();
}

std::string render(const Table& t, const RunConfig& cfg) {
  const json config = cli::to_json(cfg);
  if (cfg.format == Format::Json) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    json out{{"generator", generator()}, {"config", config}, {"meta", t.meta}, {"columns", t.columns},
             {"rows", rows}};
    return out.dump(1) + "\n";
  }
  std::ostringstream os;
  os << "# generator: " << generator() << "\n";
  os << "# config: " << config.dump() << "\n";
  for (const auto& [k, v] : t.meta.items()) os << "# " << k << ": " << v.dump() << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
    os << "\n";
  }
  return os.str();
}

double single(const cli::Grid& g, const char* key) {
  const auto v = g.values();
  if (v.size() != 1) throw ConfigError(std::string(key) + ": this command needs a single value");
  return v.front();
}

shuttle::PhysicalSystem osc_system(const RunConfig& c) { return shuttle::in_oscillator_units(c.system); }

shuttle::Trajectory osc_trajectory(shuttle::Ansatz a, double T_osc, const shuttle::PhysicalSystem& osc, double n6) {
  if (a == shuttle::Ansatz::Poly6) return shuttle::Trajectory::poly6_normalized(T_osc, osc.distance, n6);
  return shuttle::make_trajectory(a, T_osc, osc.distance);
}

// ---------------------------------------------------------------- trajectory

Table cmd_trajectory(const RunConfig& c) {
  const double T_T0 = single(c.T, "T");
  const double T = T_T0 * c.period();
  const double d = c.system.distance;
  Table t;
  auto make = [&](shuttle::Ansatz a) {
    if (a == shuttle::Ansatz::Poly6) return shuttle::Trajectory::poly6_normalized(T, d, c.n6);
    return shuttle::make_trajectory(a, T, d);
  };
  if (c.autocorr) {
    const double T0 = c.period();
    const double f0 = d > 0.0 ? d * d / (T0 * T0 * T0) : 1.0;
    t.columns = {"s"};
    for (auto a : c.ansatz) t.columns.push_back("f_" + std::string(shuttle::to_string(a)));
    t.meta["units"] = "s in T0; f in d^2/T0^3";
    std::vector<shuttle::Trajectory> trajs;
    for (auto a : c.ansatz) trajs.push_back(make(a));
    for (int i = 0; i < c.samples; ++i) {
      const double s = i + 1 == c.samples ? T : T * i / (c.samples - 1);
      std::vector<json> row{s / T0};
      for (const auto& tr : trajs) row.push_back(shuttle::f_autocorr(tr, s, c.system.omega0) / f0);
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  t.columns = {"ansatz", "t", "q_c", "q_c_dot", "q_c_ddot", "q_0"};
  t.meta["units"] = "SI (s, m, m/s, m/s^2, m)";
  for (auto a : c.ansatz) {
    const auto tr = make(a);
    for (int i = 0; i < c.samples; ++i) {
      const double time = i + 1 == c.samples ? T : T * i / (c.samples - 1);
      t.rows.push_back({std::string(shuttle::to_string(a)), time, tr.position(time), tr.velocity(time),
                        tr.acceleration(time), tr.trap_position(time, c.system.omega0)});
    }
  }
  return t;
}

// --------------------------------------------------------------- sensitivity

std::string resolve_method(const RunConfig& c, shuttle::Ansatz a) {
  if (c.method != "auto") return c.method;
  return c.noise == "ou" && a == shuttle::Ansatz::Poly5 ? "ou-exact" : "quadrature";
}

void check_method(const RunConfig& c) {
  for (auto a : c.ansatz) {
    const std::string m = resolve_method(c, a);
    const bool poly5 = a == shuttle::Ansatz::Poly5;
    const bool ou = c.noise == "ou";
    if ((m == "ou-exact" || m == "ou-mid-tau" || m == "ou-large-tau") && !(ou && poly5))
      throw ConfigError("method: '" + m + "' needs OU noise and the poly5 trajectory");
    if (m == "ou-short-tau" && !ou) throw ConfigError("method: 'ou-short-tau' needs OU noise");
    if (m == "flicker-flat" && ou) throw ConfigError("method: 'flicker-flat' needs flicker noise");
    if (m == "flicker-poly-closed" && !(!ou && poly5))
      throw ConfigError("method: 'flicker-poly-closed' needs flicker noise and the poly5 trajectory");
  }
}

shuttle::Sensitivities evaluate(const std::string& m, const RunConfig& c, shuttle::Ansatz a, double T_T0,
                                double tau_T0, const shuttle::PhysicalSystem& osc) {
  using namespace shuttle;
  const double T = T_T0 * kTwoPi, tau = tau_T0 * kTwoPi;
  const double t1 = c.tau1 * kTwoPi, t2 = c.tau2 * kTwoPi;
  const auto traj = osc_trajectory(a, T, osc, c.n6);
  if (m == "quadrature") return sensitivities_quadrature(c.noise_model(tau_T0), traj, osc);
  if (m == "ou-exact") return {g1_ou_exact(tau, T, osc), g2_ou_exact_poly(tau, T, osc), Method::OUExact};
  if (m == "ou-short-tau") return g_ou_short_tau(tau, traj, osc);
  if (m == "ou-mid-tau") return g_ou_mid_tau(tau, T, osc);
  if (m == "ou-large-tau") return {g1_ou_large_tau(tau, T, osc), g2_ou_large_tau_poly(tau, T, osc), Method::OULargeTau};
  if (m == "flicker-flat") return g_flicker_flat(t1, t2, traj, osc);
  auto flat = g_flicker_flat(t1, t2, traj, osc);
  return {flat.g1, g2_flicker_poly_closed(t1, t2, T, osc), Method::FlickerPolyClosed};
}

Table cmd_sensitivity(const RunConfig& c, unsigned threads) {
  check_method(c);
  const auto osc = osc_system(c);
  const bool ou = c.noise == "ou";
  const auto Ts = c.T.values();
  const auto taus = ou ? c.tau.values() : std::vector<double>{c.tau1};
  struct Job {
    shuttle::Ansatz a;
    double T, tau;
  };
  std::vector<Job> jobs;
  for (auto a : c.ansatz)
    for (double tau : taus)
      for (double T : Ts) jobs.push_back({a, T, tau});
  std::vector<shuttle::Sensitivities> out(jobs.size());
  shuttle::parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto& j = jobs[i];
    out[i] = evaluate(resolve_method(c, j.a), c, j.a, j.T, j.tau, osc);
  });

  Table t;
  t.meta["units"] = "T and tau in T0; g1, g2 in hbar*omega0^2";
  t.columns = ou ? std::vector<std::string>{"ansatz", "T", "tau", "g1", "g2", "method"}
                 : std::vector<std::string>{"ansatz", "T", "tau1", "tau2", "g1", "g2", "method"};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    std::vector<json> row{std::string(shuttle::to_string(jobs[i].a)), jobs[i].T};
    if (ou) {
      row.push_back(jobs[i].tau);
    } else {
      row.push_back(c.tau1);
      row.push_back(c.tau2);
    }
    row.push_back(out[i].g1);
    row.push_back(out[i].g2);
    row.push_back(std::string(shuttle::to_string(out[i].method)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- montecarlo

struct MonteCarloOutcome {
  std::string text;
  bool within_band;
};

MonteCarloOutcome cmd_montecarlo(const RunConfig& c, unsigned threads, const std::string& dump_path) {
  if (c.ansatz.size() != 1) throw ConfigError("ansatz: montecarlo needs a single trajectory family");
  const double T_T0 = single(c.T, "T");
  const double tau_T0 = c.noise == "ou" ? single(c.tau, "tau") : c.tau1;
  const auto osc = osc_system(c);
  const auto traj = osc_trajectory(c.ansatz.front(), T_T0 * kTwoPi, osc, c.n6);
  const auto model = c.noise_model(tau_T0);
  shuttle::MonteCarloOptions opt;
  opt.dt = c.dt * kTwoPi;
  opt.threads = threads;
  opt.keep_samples = !dump_path.empty();
  const auto rep = shuttle::run_monte_carlo(traj, model, c.lambda, static_cast<std::size_t>(c.realizations),
                                            c.seed, osc, opt);
  const bool ok = rep.within_band();

  if (!dump_path.empty()) {
    std::ofstream out(dump_path);
    if (!out) throw ConfigError("cannot write '" + dump_path + "'");
    out << "realization,seed,excitation\n";
    for (std::size_t i = 0; i < rep.samples.size(); ++i)
      out << i + 1 << "," << shuttle::realization_seed(c.seed, i + 1) << "," << format_double(rep.samples[i]) << "\n";
  }

  json report{{"n_realizations", rep.n_realizations},
              {"n_failed", rep.n_failed},
              {"lambda", rep.lambda},
              {"mean_excitation", rep.mean_excitation},
              {"std_error", rep.std_error},
              {"predicted", rep.predicted},
              {"g1", rep.g1},
              {"g2", rep.g2},
              {"ratio", number_or_null(rep.ratio)},
              {"master_seed", rep.master_seed},
              {"dt", rep.dt / kTwoPi},
              {"steps", rep.steps},
              {"min_excitation", rep.min_excitation},
              {"roundoff_floor", rep.roundoff_floor},
              {"band", {{"std_errors", 3}, {"rel_bias", 0.05}}},
              {"within_band", ok}};
  const json units = "energies in hbar*omega0, g1 and g2 in hbar*omega0^2, dt in T0";
  if (c.format == Format::Json) {
    json out{{"generator", generator()}, {"config", cli::to_json(c)}, {"units", units}, {"report", report}};
    return {out.dump(1) + "\n", ok};
  }
  Table t;
  t.meta["units"] = units;
  for (const auto& [k, v] : report.items()) {
    if (k == "band") continue;
    t.columns.push_back(k);
  }
  std::vector<json> row;
  for (const auto& k : t.columns) row.push_back(report[k]);
  t.rows.push_back(row);
  return {render(t, c), ok};
}

// ----------------------------------------------------------------- crossover

void check_tau_range(const std::vector<double>& taus) {
  for (double tau : taus)
    if (tau < 1e-3 * (1 - 1e-9) || tau > 10.0 * (1 + 1e-9))
      throw ConfigError("tau: crossover and optimization need tau in [1e-3, 10] T0");
}

Table cmd_crossover(const RunConfig& c, unsigned threads) {
  if (c.noise != "ou") throw ConfigError("noise: crossover scans use OU noise");
  const auto taus = c.tau.values();
  check_tau_range(taus);
  const auto osc = osc_system(c);
  std::vector<double> taus_osc;
  for (double tau : taus) taus_osc.push_back(tau * kTwoPi);
  const auto scan = shuttle::crossover_scan(taus_osc, osc, threads, c.seed);
  Table t;
  t.meta["units"] = "times in T0";
  t.meta["spot_check_max_rel_deviation"] = scan.spot_check_deviation;
  t.meta["t_opt_plateau"] = shuttle::approximate_optimal_T(osc) / kTwoPi;
  t.columns = {"tau", "t_cross", "t_opt", "t_cross_approx", "roots", "unimodal"};
  for (const auto& p : scan.points)
    t.rows.push_back({p.tau / kTwoPi, p.t_cross / kTwoPi, p.t_opt / kTwoPi,
                      shuttle::approximate_crossover_T(p.tau, osc) / kTwoPi, p.roots, p.unimodal});
  return t;
}

// --------------------------------------------------------------- optimize-n6

Table cmd_optimize_n6(const RunConfig& c, unsigned threads) {
  if (c.noise != "ou") throw ConfigError("noise: optimize-n6 uses OU noise");
  const auto Ts = c.T.values();
  const auto taus = c.tau.values();
  check_tau_range(taus);
  for (double T : Ts)
    if (T < 1.0 - 1e-9 || T > 10.0 + 1e-9) throw ConfigError("T: optimize-n6 needs T in [1, 10] T0");
  const auto osc = osc_system(c);
  std::vector<std::pair<double, double>> jobs;
  for (double tau : taus)
    for (double T : Ts) jobs.emplace_back(T, tau);
  std::vector<shuttle::N6Optimum> out(jobs.size());
  shuttle::parallel_for(jobs.size(), threads, [&](std::size_t i) {
    out[i] = shuttle::optimize_n6(jobs[i].first * kTwoPi, jobs[i].second * kTwoPi, osc);
  });
  Table t;
  t.meta["units"] = "T and tau in T0; n6 in m/s^6; g2 in hbar*omega0^2";
  t.columns = {"T", "tau", "n6_normalized", "n6", "g2_min", "g2_poly5", "rel_improvement"};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const double T_si = jobs[i].first * c.period();
    const auto& o = out[i];
    t.rows.push_back({jobs[i].first, jobs[i].second, o.n6_normalized,
                      o.n6_normalized * c.system.distance / std::pow(T_si, 6), o.g2_min, o.g2_poly5,
                      (o.g2_poly5 - o.g2_min) / o.g2_poly5});
  }
  return t;
}

// -------------------------------------------------------------- noise-sample

Table cmd_noise_sample(const RunConfig& c) {
  const double T_T0 = single(c.T, "T");
  const double tau_T0 = c.noise == "ou" ? single(c.tau, "tau") : c.tau1;
  const auto model = c.noise_model(tau_T0);
  const double dt = c.dt > 0.0 ? c.dt * kTwoPi : shuttle::max_noise_step(model.min_tau(), 1.0);
  // Same stream as realization 1 of a Monte Carlo run with this seed.
  const auto path = shuttle::sample_path(model, T_T0 * kTwoPi, dt, shuttle::realization_seed(c.seed, 1), 1.0);
  Table t;
  t.meta["units"] = "t and tau in T0; xi in omega0^(1/2)";
  t.meta["tau_drawn"] = path.tau_drawn / kTwoPi;
  t.meta["steps"] = path.steps();
  t.columns = {"t", "xi"};
  for (std::size_t k = 0; k < path.samples.size(); ++k)
    t.rows.push_back({k == path.steps() ? T_T0 : static_cast<double>(k) * path.dt / kTwoPi, path.samples[k]});
  return t;
}

// --------------------------------------------------------------------- main

struct Flags {
  std::optional<std::string> config_file, preset, output, dump;
  std::map<std::string, std::string> values;
  bool autocorr = false;
  unsigned threads = shuttle::default_thread_count();
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_file, "JSON config file, or a previous output file");
  sub->add_option("--preset", f.preset, "Named parameter set: fig1 ... fig7");
  sub->add_option("-o,--output", f.output, "Output file (default: stdout)");
  sub->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"mass", "Particle mass [kg]"},
      {"omega0", "Trap angular frequency [rad/s]"},
      {"distance", "Transport distance [m]"},
      {"mode", "Initial transport mode n"},
      {"ansatz", "Trajectory family list: poly5,cosine3,poly6"},
      {"n6", "Normalized sextic coefficient n6 T^6 / d"},
      {"noise", "ou or flicker"},
      {"tau", "OU correlation time(s) [T0]: v, v1,v2,... or min:max:points[:log|linear]"},
      {"tau1", "Flicker lower correlation time [T0]"},
      {"tau2", "Flicker upper correlation time [T0]"},
      {"T", "Transport time(s) [T0], same syntax as --tau"},
      {"method", "Sensitivity method"},
      {"lambda", "Noise strength (oscillator units)"},
      {"realizations", "Monte Carlo ensemble size"},
      {"seed", "Master seed"},
      {"dt", "Noise grid step [T0], 0 for the default"},
      {"samples", "Sample points for trajectory output"},
      {"format", "csv or json"},
  };
  for (const auto& [k, help] : keys) {
    sub->add_option_function<std::string>("--" + k, [&f, key = k](const std::string& v) { f.values[key] = v; },
                                          help);
  }
  sub->add_flag("--autocorr", f.autocorr, "Emit the acceleration autocorrelation f(s)");
}

json flag_overrides(const Flags& f) {
  json j = json::object();
  auto number = [](const std::string& key, const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("--" + key + ": cannot parse '" + s + "' as a number");
    }
  };
  for (const auto& [k, v] : f.values) {
    if (k == "T" || k == "tau") {
      j[k] = cli::grid_flag_to_json(v, k);
    } else if (k == "ansatz") {
      json arr = json::array();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) arr.push_back(item);
      j[k] = arr;
    } else if (k == "noise" || k == "method" || k == "format") {
      j[k] = v;
    } else if (k == "mode" || k == "realizations" || k == "seed" || k == "samples") {
      const double x = number(k, v);
      if (x != std::floor(x)) throw ConfigError("--" + k + ": expected an integer");
      j[k] = static_cast<long long>(x);
    } else {
      j[k] = number(k, v);
    }
  }
  if (f.autocorr) j["autocorr"] = true;
  return j;
}

RunConfig resolve(const std::string& command, const Flags& f) {
  json merged = cli::default_config_json(command);
  auto overlay = [&](const json& j, const std::string& origin) {
    if (!j.is_object()) throw ConfigError(origin + ": expected a JSON object");
    for (const auto& [k, v] : j.items()) merged[k] = v;
  };
  if (f.preset) overlay(cli::preset(*f.preset), "preset");
  if (f.config_file) overlay(cli::read_config_file(*f.config_file), "config file");
  overlay(flag_overrides(f), "flags");
  auto cfg = cli::parse_config(merged);
  if (cfg.command != command)
    throw ConfigError("configuration is for the '" + cfg.command + "' command, not '" + command + "'");
  return cfg;
}

std::filesystem::path output_path(const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("SHUTTLE_OUTPUT_DIR"); dir && *dir) path = std::filesystem::path(dir) / path;
  }
  return path;
}

void emit(const std::string& text, const Flags& f) {
  if (!f.output) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const auto path = output_path(*f.output);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise sensitivity of shortcut-to-adiabaticity ion transport"};
  app.set_version_flag("--version", generator());
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"trajectory", "Sample the reference trajectory or its acceleration autocorrelation"},
      {"sensitivity", "Static and dynamical noise sensitivities over a (T, tau) grid"},
      {"montecarlo", "Ensemble average of the exact excitation versus the prediction"},
      {"crossover", "Transport times where G1 = G2 and where G1 + G2 is minimal"},
      {"optimize-n6", "Optimal free coefficient of the sextic trajectory"},
      {"noise-sample", "One sampled noise path"},
  };
  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], flags[name]);
  }
  subs["montecarlo"]->add_option("--dump-samples", flags["montecarlo"].dump, "Per-realization excitation CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;
  const Flags& f = flags[command];

  try {
    const RunConfig cfg = resolve(command, f);
    if (command == "montecarlo") {
      const auto res = cmd_montecarlo(cfg, f.threads, f.dump ? output_path(*f.dump).string() : "");
      emit(res.text, f);
      if (!res.within_band) {
        std::cerr << "monte carlo mean outside the prediction band\n";
        return kExitOutOfBand;
      }
      return 0;
    }
    Table t;
    if (command == "trajectory") t = cmd_trajectory(cfg);
    else if (command == "sensitivity") t = cmd_sensitivity(cfg, f.threads);
    else if (command == "crossover") t = cmd_crossover(cfg, f.threads);
    else if (command == "optimize-n6") t = cmd_optimize_n6(cfg, f.threads);
    else t = cmd_noise_sample(cfg);
    emit(render(t, cfg), f);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const shuttle::InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const shuttle::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const shuttle::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const shuttle::Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
