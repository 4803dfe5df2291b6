// Copyright 2026 The CavLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON run configuration and table output (CSV or JSON). Every output embeds
// the fully resolved configuration so a run can be repeated from the file.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavlab/analytic.hpp"
#include "cavlab/liouville/operators.hpp"
#include "cavlab/model.hpp"

namespace cavlab::io {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double min = -10.0;
  double max = 10.0;
  int n = 401;
  std::vector<double> points() const { return linspace(min, max, static_cast<std::size_t>(n)); }
};

enum class SweepVariable { dephasing_time, gamma_par };

struct SweepSpec {
  SweepVariable variable = SweepVariable::dephasing_time;
  double min = 1e-2;
  double max = 1e3;
  int n = 101;
};

struct RunConfig {
  SystemParams params;
  std::optional<complex> target_mean_field;  // overrides beta when set
  double omega_L = 0.0;
  GridSpec grid;
  std::string method = "analytic";
  std::uint64_t seed = 20240601;
  std::string format = "csv";
  // truncation
  int cutoff = 0;  // 0 picks a default per command
  int atom_cutoff = 2;
  int max_excitations = 0;
  liouville::AtomModel atom_model = liouville::AtomModel::oscillator;
  int collective_atoms = 0;  // 0 keeps n_atoms; otherwise rescale g to this many atoms
  // probe
  double epsilon = 1e-3;
  double kappa_p = 0.0;
  // regression
  double t_max = 0.0;  // 0 picks the default window
  double dt = 0.0;     // 0 picks a default step
  // profile
  bool crosscheck_moments = false;
  // height scan
  SweepSpec sweep;
  // wigner
  GridSpec wigner_grid{-6.0, 6.0, 241};
};

namespace detail {

inline double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config field '" + key + "' must be a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("config field '" + key + "' must be an integer");
  return j.get<int>();
}

/// Noise time: number, null, "inf" or omitted. Returns the rate 1/tau.
inline double noise_rate(const json& obj, const std::string& key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return 0.0;
  const json& j = obj.at(key);
  if (j.is_string()) {
    if (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity") return 0.0;
    throw ConfigError("config field '" + key + "' must be a positive number, null or \"inf\"");
  }
  const double tau = number(j, key);
  if (!(tau > 0.0)) throw ConfigError("config field '" + key + "' must be positive (omit it to switch the channel off)");
  return rate_from_time(tau);
}

inline complex complex_value(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("config field '" + key + "' must be a number or [re, im]");
}

inline json complex_json(complex z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

inline json time_json(double rate) {
  if (rate == 0.0) return "inf";
  return time_from_rate(rate);
}

inline GridSpec grid_value(const json& j, const std::string& key) {
  GridSpec g;
  if (!j.is_object()) throw ConfigError("config field '" + key + "' must be an object {min, max, n} or \"min:max:n\"");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "min") g.min = number(it.value(), key + ".min");
    else if (it.key() == "max") g.max = number(it.value(), key + ".max");
    else if (it.key() == "n") g.n = integer(it.value(), key + ".n");
    else throw ConfigError("unknown field '" + key + "." + it.key() + "'");
  }
  return g;
}

inline void check_grid(const GridSpec& g, const std::string& key) {
  if (!(g.min < g.max)) throw ConfigError(key + ": min must be below max");
  if (g.n < 2) throw ConfigError(key + ": need at least two points");
}

}  // namespace detail

/// Parses "min:max:n".
inline GridSpec parse_grid(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos) throw ConfigError("grid must look like min:max:n, got '" + text + "'");
  GridSpec g;
  try {
    std::size_t used = 0;
    const std::string s_min = text.substr(0, a), s_max = text.substr(a + 1, b - a - 1), s_n = text.substr(b + 1);
    g.min = std::stod(s_min, &used);
    if (used != s_min.size()) throw std::invalid_argument("min");
    g.max = std::stod(s_max, &used);
    if (used != s_max.size()) throw std::invalid_argument("max");
    g.n = std::stoi(s_n, &used);
    if (used != s_n.size()) throw std::invalid_argument("n");
  } catch (const std::logic_error&) {
    throw ConfigError("grid must look like min:max:n, got '" + text + "'");
  }
  detail::check_grid(g, "grid");
  return g;
}

inline void check_method(const std::string& m) {
  if (m != "analytic" && m != "moments" && m != "liouville" && m != "probe")
    throw ConfigError("method must be one of analytic, moments, liouville, probe (got '" + m + "')");
}

inline void check_format(const std::string& f) {
  if (f != "csv" && f != "json") throw ConfigError("format must be csv or json (got '" + f + "')");
}

/// Drive amplitude that gives the requested mean cavity field at omega_L.
inline complex drive_for_mean_field(const SystemParams& p, double omega_L, complex target) {
  const complex per_drive = analytic::detail::field_per_drive(p, derive(p, omega_L));
  return target / per_drive;
}

inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const char* known[] = {"g", "n_atoms", "kappa1", "kappa2", "omega_c", "omega_a", "gamma_par", "tau_indiv",
                                "tau_common", "tau_jitter", "beta", "target_mean_field", "omega_L", "grid", "method",
                                "seed", "format", "cutoff", "atom_cutoff", "max_excitations", "atom_model",
                                "collective_atoms", "epsilon", "kappa_p", "t_max", "dt", "crosscheck_moments",
                                "sweep", "wigner_grid", "comment"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown config field '" + it.key() + "'");
  }
  RunConfig c;
  SystemParams& p = c.params;
  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = detail::number(j.at(key), key);
  };
  auto integer = [&](const char* key, int& dst) {
    if (j.contains(key)) dst = detail::integer(j.at(key), key);
  };
  num("g", p.g);
  integer("n_atoms", p.n_atoms);
  num("kappa1", p.kappa1);
  num("kappa2", p.kappa2);
  num("omega_c", p.omega_c);
  num("omega_a", p.omega_a);
  num("gamma_par", p.gamma_par);
  p.indiv_rate = detail::noise_rate(j, "tau_indiv");
  p.common_rate = detail::noise_rate(j, "tau_common");
  p.jitter_rate = detail::noise_rate(j, "tau_jitter");
  if (j.contains("beta")) p.beta = detail::complex_value(j.at("beta"), "beta");
  if (j.contains("target_mean_field")) c.target_mean_field = detail::complex_value(j.at("target_mean_field"), "target_mean_field");
  num("omega_L", c.omega_L);
  if (j.contains("grid")) {
    c.grid = j.at("grid").is_string() ? parse_grid(j.at("grid").get<std::string>()) : detail::grid_value(j.at("grid"), "grid");
    detail::check_grid(c.grid, "grid");
  }
  if (j.contains("wigner_grid")) {
    c.wigner_grid = j.at("wigner_grid").is_string() ? parse_grid(j.at("wigner_grid").get<std::string>())
                                                    : detail::grid_value(j.at("wigner_grid"), "wigner_grid");
    detail::check_grid(c.wigner_grid, "wigner_grid");
  }
  if (j.contains("method")) {
    if (!j.at("method").is_string()) throw ConfigError("config field 'method' must be a string");
    c.method = j.at("method").get<std::string>();
    check_method(c.method);
  }
  if (j.contains("format")) {
    if (!j.at("format").is_string()) throw ConfigError("config field 'format' must be a string");
    c.format = j.at("format").get<std::string>();
    check_format(c.format);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("config field 'seed' must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  integer("cutoff", c.cutoff);
  integer("atom_cutoff", c.atom_cutoff);
  integer("max_excitations", c.max_excitations);
  integer("collective_atoms", c.collective_atoms);
  if (j.contains("atom_model")) {
    const auto& m = j.at("atom_model");
    if (m == "oscillator") c.atom_model = liouville::AtomModel::oscillator;
    else if (m == "two_level") c.atom_model = liouville::AtomModel::two_level;
    else throw ConfigError("atom_model must be oscillator or two_level");
  }
  num("epsilon", c.epsilon);
  num("kappa_p", c.kappa_p);
  num("t_max", c.t_max);
  num("dt", c.dt);
  if (j.contains("crosscheck_moments")) {
    if (!j.at("crosscheck_moments").is_boolean()) throw ConfigError("config field 'crosscheck_moments' must be a boolean");
    c.crosscheck_moments = j.at("crosscheck_moments").get<bool>();
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("config field 'sweep' must be an object");
    for (auto it = s.begin(); it != s.end(); ++it) {
      if (it.key() == "variable") {
        if (it.value() == "dephasing_time") c.sweep.variable = SweepVariable::dephasing_time;
        else if (it.value() == "gamma_par") c.sweep.variable = SweepVariable::gamma_par;
        else throw ConfigError("sweep.variable must be dephasing_time or gamma_par");
      } else if (it.key() == "min") c.sweep.min = detail::number(it.value(), "sweep.min");
      else if (it.key() == "max") c.sweep.max = detail::number(it.value(), "sweep.max");
      else if (it.key() == "n") c.sweep.n = detail::integer(it.value(), "sweep.n");
      else throw ConfigError("unknown field 'sweep." + it.key() + "'");
    }
    if (!(c.sweep.min > 0.0 && c.sweep.min < c.sweep.max)) throw ConfigError("sweep: need 0 < min < max");
    if (c.sweep.n < 2) throw ConfigError("sweep: need at least two points");
  }
  if (c.cutoff < 0 || c.atom_cutoff < 1 || c.max_excitations < 0 || c.collective_atoms < 0)
    throw ConfigError("truncation settings must be non-negative (atom_cutoff at least 1)");
  if (j.contains("epsilon") && !(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (c.kappa_p < 0.0 || c.t_max < 0.0 || c.dt < 0.0) throw ConfigError("kappa_p, t_max and dt must be non-negative");

  try {
    validate(p);
  } catch (const ParamError& e) {
    throw ConfigError(e.what());
  }
  if (c.target_mean_field) p.beta = drive_for_mean_field(p, c.omega_L, *c.target_mean_field);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline json params_json(const SystemParams& p) {
  json j;
  j["g"] = p.g;
  j["n_atoms"] = p.n_atoms;
  j["kappa1"] = p.kappa1;
  j["kappa2"] = p.kappa2;
  j["omega_c"] = p.omega_c;
  j["omega_a"] = p.omega_a;
  j["gamma_par"] = p.gamma_par;
  j["tau_indiv"] = detail::time_json(p.indiv_rate);
  j["tau_common"] = detail::time_json(p.common_rate);
  j["tau_jitter"] = detail::time_json(p.jitter_rate);
  j["beta"] = detail::complex_json(p.beta);
  return j;
}

/// Fully resolved configuration (beta already solved for when a target mean
/// field was given).
inline json config_json(const RunConfig& c) {
  json j = params_json(c.params);
  if (c.target_mean_field) j["target_mean_field"] = detail::complex_json(*c.target_mean_field);
  j["omega_L"] = c.omega_L;
  j["grid"] = {{"min", c.grid.min}, {"max", c.grid.max}, {"n", c.grid.n}};
  j["method"] = c.method;
  j["seed"] = c.seed;
  j["format"] = c.format;
  j["cutoff"] = c.cutoff;
  j["atom_cutoff"] = c.atom_cutoff;
  j["max_excitations"] = c.max_excitations;
  j["atom_model"] = c.atom_model == liouville::AtomModel::two_level ? "two_level" : "oscillator";
  j["collective_atoms"] = c.collective_atoms;
  j["epsilon"] = c.epsilon;
  j["kappa_p"] = c.kappa_p;
  j["t_max"] = c.t_max;
  j["dt"] = c.dt;
  j["crosscheck_moments"] = c.crosscheck_moments;
  j["sweep"] = {{"variable", c.sweep.variable == SweepVariable::gamma_par ? "gamma_par" : "dephasing_time"},
                {"min", c.sweep.min},
                {"max", c.sweep.max},
                {"n", c.sweep.n}};
  j["wigner_grid"] = {{"min", c.wigner_grid.min}, {"max", c.wigner_grid.max}, {"n", c.wigner_grid.n}};
  return j;
}

/// Shortest text with 17 significant digits, independent of the locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  json meta = json::object();  // run summary written next to the config
};

inline void write_csv(std::ostream& out, const Table& t, const json& config) {
  out << "# config: " << config.dump() << '\n';
  for (auto it = t.meta.begin(); it != t.meta.end(); ++it) out << "# " << it.key() << ": " << it.value().dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

inline void write_json(std::ostream& out, const Table& t, const json& config) {
  json j;
  j["config"] = config;
  j["meta"] = t.meta;
  j["columns"] = t.columns;
  j["rows"] = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (double v : row) r.push_back(v);
    j["rows"].push_back(std::move(r));
  }
  out << j.dump(2) << '\n';
}

inline void write_table(std::ostream& out, const Table& t, const json& config, const std::string& format) {
  check_format(format);
  if (format == "json")
    write_json(out, t, config);
  else
    write_csv(out, t, config);
}

}  // namespace cavlab::io
