#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shuttle/shuttle.hpp"

namespace cli {

using nlohmann::json;

/// Malformed or inconsistent run configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A list of values, either explicit or generated from min/max/points.
struct Grid {
  std::vector<double> explicit_values;
  double min = 0.0, max = 0.0;
  int points = 0;
  bool log = true;

  bool is_explicit() const { return points == 0; }

  std::vector<double> values() const {
    if (is_explicit()) return explicit_values;
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) {
      const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
      v[i] = log ? min * std::pow(max / min, f) : min + (max - min) * f;
    }
    if (points > 1) v.back() = max;
    return v;
  }

  json to_json() const {
    if (is_explicit()) {
      if (explicit_values.size() == 1) return explicit_values.front();
      return explicit_values;
    }
    return json{{"min", min}, {"max", max}, {"points", points}, {"spacing", log ? "log" : "linear"}};
  }
};

inline Grid parse_grid(const json& j, const std::string& key) {
  Grid g;
  if (j.is_number()) {
    g.explicit_values = {j.get<double>()};
  } else if (j.is_array()) {
    if (j.empty()) throw ConfigError(key + ": empty list");
    for (const auto& x : j) {
      if (!x.is_number()) throw ConfigError(key + ": list entries must be numbers");
      g.explicit_values.push_back(x.get<double>());
    }
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items())
      if (k != "min" && k != "max" && k != "points" && k != "spacing")
        throw ConfigError(key + ": unknown grid key '" + k + "'");
    if (!j.contains("min") || !j.contains("max") || !j.contains("points"))
      throw ConfigError(key + ": grid needs min, max and points");
    if (!j["min"].is_number() || !j["max"].is_number() || !j["points"].is_number_integer())
      throw ConfigError(key + ": min and max must be numbers, points an integer");
    g.min = j["min"].get<double>();
    g.max = j["max"].get<double>();
    g.points = j["points"].get<int>();
    const std::string spacing = j.value("spacing", "log");
    if (spacing != "log" && spacing != "linear") throw ConfigError(key + ".spacing must be 'log' or 'linear'");
    g.log = spacing == "log";
    if (g.points < 1) throw ConfigError(key + ".points must be at least 1");
    if (!(g.max >= g.min)) throw ConfigError(key + ": max must not be below min");
    if (g.log && !(g.min > 0.0)) throw ConfigError(key + ": log spacing needs min > 0");
  } else {
    throw ConfigError(key + ": expected a number, a list or a grid object");
  }
  for (double v : g.values())
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + ": values must be positive");
  return g;
}

/// Flag syntax for grids: "5", "1,2,3" or "min:max:points[:log|linear]".
inline json grid_flag_to_json(const std::string& s, const std::string& key) {
  auto number = [&](const std::string& t) {
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("--" + key + ": cannot parse '" + t + "'");
    }
  };
  auto split = [](const std::string& t, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
  };
  if (s.find(':') != std::string::npos) {
    const auto p = split(s, ':');
    if (p.size() < 3 || p.size() > 4) throw ConfigError("--" + key + ": expected min:max:points[:spacing]");
    const double pts = number(p[2]);
    if (pts != std::floor(pts)) throw ConfigError("--" + key + ": points must be an integer");
    return json{{"min", number(p[0])},
                {"max", number(p[1])},
                {"points", static_cast<int>(pts)},
                {"spacing", p.size() == 4 ? p[3] : "log"}};
  }
  if (s.find(',') != std::string::npos) {
    json arr = json::array();
    for (const auto& t : split(s, ',')) arr.push_back(number(t));
    return arr;
  }
  return number(s);
}

enum class Format { Csv, Json };

/// Fully resolved run configuration. Times are in units of the trap period
/// T0, the system in SI units and lambda in oscillator units.
struct RunConfig {
  std::string command;
  shuttle::PhysicalSystem system = shuttle::calcium_reference_system();
  std::vector<shuttle::Ansatz> ansatz{shuttle::Ansatz::Poly5};
  double n6 = 0.0;  // normalized n6 T^6 / d
  std::string noise = "ou";
  Grid tau;
  double tau1 = 80.0, tau2 = 100.0;
  Grid T;
  std::string method = "auto";
  double lambda = 0.01;
  long realizations = 4000;
  std::uint64_t seed = 1;
  double dt = 0.0;  // 0 selects the default step
  int samples = 201;
  bool autocorr = false;
  Format format = Format::Csv;

  double period() const { return system.period(); }

  shuttle::NoiseModel noise_model(double tau_T0) const {
    const double s = 2.0 * std::numbers::pi;  // T0 in oscillator units
    if (noise == "ou") return shuttle::NoiseModel::ou(tau_T0 * s);
    return shuttle::NoiseModel::flicker(tau1 * s, tau2 * s);
  }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "command", "mass",   "omega0", "distance", "mode",    "ansatz",       "n6",   "noise",
      "tau",     "tau1",   "tau2",   "T",        "method",  "lambda",       "realizations",
      "seed",    "dt",     "samples", "autocorr", "format"};
  return keys;
}

inline json default_config_json(const std::string& command) {
  const auto sys = shuttle::calcium_reference_system();
  return json{{"command", command},
              {"mass", sys.mass},
              {"omega0", sys.omega0},
              {"distance", sys.distance},
              {"mode", sys.mode},
              {"ansatz", json::array({"poly5"})},
              {"n6", 0.0},
              {"noise", "ou"},
              {"tau", 0.1},
              {"tau1", 80.0},
              {"tau2", 100.0},
              {"T", 5.0},
              {"method", "auto"},
              {"lambda", 0.01},
              {"realizations", 4000},
              {"seed", 1},
              {"dt", 0.0},
              {"samples", 201},
              {"autocorr", false},
              {"format", "csv"}};
}

inline shuttle::Ansatz parse_ansatz(const std::string& s) {
  if (s == "poly5") return shuttle::Ansatz::Poly5;
  if (s == "cosine3") return shuttle::Ansatz::Cosine3;
  if (s == "poly6") return shuttle::Ansatz::Poly6;
  throw ConfigError("ansatz: unknown trajectory family '" + s + "' (poly5, cosine3, poly6)");
}

inline const std::set<std::string>& method_names() {
  static const std::set<std::string> names = {"auto",        "quadrature",   "ou-exact",      "ou-short-tau",
                                              "ou-mid-tau",  "ou-large-tau", "flicker-flat",  "flicker-poly-closed"};
  return names;
}

namespace detail {

inline double number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(key + ": missing");
  if (!j[key].is_number()) throw ConfigError(key + ": expected a number");
  return j[key].get<double>();
}

inline long integer(const json& j, const std::string& key) {
  const double v = number(j, key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(key + ": expected an integer");
  return static_cast<long>(v);
}

inline std::string string(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_string()) throw ConfigError(key + ": expected a string");
  return j[key].get<std::string>();
}

}  // namespace detail

/// Validates a merged configuration object and converts it.
inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown configuration key '" + k + "'");

  RunConfig c;
  c.command = detail::string(j, "command");
  c.system.mass = detail::number(j, "mass");
  c.system.omega0 = detail::number(j, "omega0");
  c.system.distance = detail::number(j, "distance");
  c.system.mode = static_cast<int>(detail::integer(j, "mode"));
  try {
    shuttle::validate(c.system);
  } catch (const shuttle::InvalidParameter& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }

  c.ansatz.clear();
  const auto& a = j.at("ansatz");
  if (a.is_string()) {
    c.ansatz.push_back(parse_ansatz(a.get<std::string>()));
  } else if (a.is_array() && !a.empty()) {
    for (const auto& x : a) {
      if (!x.is_string()) throw ConfigError("ansatz: entries must be strings");
      c.ansatz.push_back(parse_ansatz(x.get<std::string>()));
    }
  } else {
    throw ConfigError("ansatz: expected a name or a list of names");
  }
  c.n6 = detail::number(j, "n6");

  c.noise = detail::string(j, "noise");
  if (c.noise != "ou" && c.noise != "flicker") throw ConfigError("noise: expected 'ou' or 'flicker'");
  c.tau = parse_grid(j.at("tau"), "tau");
  c.tau1 = detail::number(j, "tau1");
  c.tau2 = detail::number(j, "tau2");
  if (c.noise == "flicker" && !(c.tau1 > 0.0 && c.tau2 > c.tau1))
    throw ConfigError("tau1, tau2: flicker noise needs 0 < tau1 < tau2");
  c.T = parse_grid(j.at("T"), "T");

  c.method = detail::string(j, "method");
  if (!method_names().count(c.method)) throw ConfigError("method: unknown method '" + c.method + "'");
  c.lambda = detail::number(j, "lambda");
  if (!(c.lambda >= 0.0 && c.lambda <= 0.05)) throw ConfigError("lambda: must lie in [0, 0.05]");
  c.realizations = detail::integer(j, "realizations");
  if (c.realizations < 100) throw ConfigError("realizations: at least 100 are required");
  const long seed = detail::integer(j, "seed");
  if (seed < 0) throw ConfigError("seed: must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.dt = detail::number(j, "dt");
  if (!(c.dt >= 0.0)) throw ConfigError("dt: must be non-negative (0 selects the default)");
  c.samples = static_cast<int>(detail::integer(j, "samples"));
  if (c.samples < 2) throw ConfigError("samples: at least 2 are required");
  if (!j.at("autocorr").is_boolean()) throw ConfigError("autocorr: expected true or false");
  c.autocorr = j["autocorr"].get<bool>();
  const std::string fmt = detail::string(j, "format");
  if (fmt != "csv" && fmt != "json") throw ConfigError("format: expected 'csv' or 'json'");
  c.format = fmt == "csv" ? Format::Csv : Format::Json;
  return c;
}

/// Canonical JSON of a resolved configuration; this is what output headers record.
inline json to_json(const RunConfig& c) {
  json ans = json::array();
  for (auto a : c.ansatz) ans.push_back(std::string(shuttle::to_string(a)));
  return json{{"command", c.command},
              {"mass", c.system.mass},
              {"omega0", c.system.omega0},
              {"distance", c.system.distance},
              {"mode", c.system.mode},
              {"ansatz", ans},
              {"n6", c.n6},
              {"noise", c.noise},
              {"tau", c.tau.to_json()},
              {"tau1", c.tau1},
              {"tau2", c.tau2},
              {"T", c.T.to_json()},
              {"method", c.method},
              {"lambda", c.lambda},
              {"realizations", c.realizations},
              {"seed", c.seed},
              {"dt", c.dt},
              {"samples", c.samples},
              {"autocorr", c.autocorr},
              {"format", c.format == Format::Csv ? "csv" : "json"}};
}

/// Named parameter sets reproducing the published figures.
inline json preset(const std::string& name) {
  static const std::map<std::string, json> presets = {
      // Acceleration autocorrelation f(s) of both protocols, T = T0.
      {"fig1", json{{"command", "trajectory"}, {"autocorr", true}, {"ansatz", json::array({"poly5", "cosine3"})},
                    {"T", 1.0}, {"samples", 401}}},
      // G1, G2 versus T for two correlation times.
      {"fig2", json{{"command", "sensitivity"}, {"ansatz", json::array({"poly5", "cosine3"})}, {"noise", "ou"},
                    {"tau", {0.01, 2.0}}, {"T", {{"min", 1.0}, {"max", 100.0}, {"points", 200}, {"spacing", "log"}}},
                    {"method", "quadrature"}}},
      // G1, G2 versus tau at commensurate and incommensurate T.
      {"fig3", json{{"command", "sensitivity"}, {"ansatz", json::array({"poly5", "cosine3"})}, {"noise", "ou"},
                    {"T", {5.0, 5.1}}, {"tau", {{"min", 1e-3}, {"max", 1e4}, {"points", 200}, {"spacing", "log"}}},
                    {"method", "quadrature"}}},
      // Crossover and optimal transport times versus tau.
      {"fig4", json{{"command", "crossover"},
                    {"tau", {{"min", 1e-3}, {"max", 10.0}, {"points", 60}, {"spacing", "log"}}}}},
      // G1, G2 surfaces over (T, tau).
      {"fig5", json{{"command", "sensitivity"}, {"ansatz", json::array({"poly5", "cosine3"})}, {"noise", "ou"},
                    {"T", {{"min", 1.0}, {"max", 10.0}, {"points", 25}, {"spacing", "log"}}},
                    {"tau", {{"min", 1e-3}, {"max", 10.0}, {"points", 25}, {"spacing", "log"}}},
                    {"method", "quadrature"}}},
      // Free sextic coefficient over the (T, tau) domain of the surfaces.
      {"fig6", json{{"command", "optimize-n6"},
                    {"T", {{"min", 1.0}, {"max", 10.0}, {"points", 5}, {"spacing", "log"}}},
                    {"tau", {{"min", 1e-3}, {"max", 10.0}, {"points", 5}, {"spacing", "log"}}}}},
      // Flicker noise, both protocols, versus T.
      {"fig7", json{{"command", "sensitivity"}, {"ansatz", json::array({"poly5", "cosine3"})}, {"noise", "flicker"},
                    {"tau1", 80.0}, {"tau2", 100.0},
                    {"T", {{"min", 1.0}, {"max", 10.0}, {"points", 361}, {"spacing", "linear"}}},
                    {"method", "quadrature"}}},
  };
  const auto it = presets.find(name);
  if (it == presets.end()) throw ConfigError("unknown preset '" + name + "' (fig1 ... fig7)");
  return it->second;
}

/// Reads a configuration file. Accepts a plain JSON object, a previous JSON
/// output (its "config" member) or a previous CSV output (its "# config:" line).
inline json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string marker = "# config: ";
  if (text.rfind("#", 0) == 0) {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind(marker, 0) == 0) {
        try {
          return json::parse(line.substr(marker.size()));
        } catch (const json::parse_error& e) {
          throw ConfigError("config header in '" + path + "' is not valid JSON: " + e.what());
        }
      }
      if (line.empty() || line[0] != '#') break;
    }
    throw ConfigError("'" + path + "' has no '# config:' header line");
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("generator") && j.contains("config")) return j["config"];
  return j;
}

}  // namespace cli
