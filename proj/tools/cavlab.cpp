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

// cavlab: data files for the transmission profile, emission spectrum, Wigner
// function and Lorentzian height, plus the acceptance report.
//
// Exit status: 0 success, 1 validation failure, 2 configuration or input error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "cavlab/cli.hpp"
#include "cavlab/validation.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kConfigError = 2;

struct Common {
  std::string config;
  std::string out;
  cavlab::cli::Overrides overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration");
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--format", c.overrides.format, "csv or json");
  cmd->add_option("--method", c.overrides.method, "analytic, moments, liouville or probe");
  cmd->add_option("--seed", c.overrides.seed, "random seed");
  cmd->add_option("--grid", c.overrides.grid, "frequency grid min:max:n");
  cmd->add_option("--cutoff", c.overrides.cutoff, "fixed cavity Fock cutoff (skips the convergence loop)");
}

cavlab::io::RunConfig resolve(const Common& c) {
  cavlab::io::RunConfig cfg = c.config.empty() ? cavlab::io::parse_config(cavlab::io::json::object())
                                               : cavlab::io::load_config(c.config);
  cavlab::cli::apply(cfg, c.overrides);
  return cfg;
}

/// Writes to --out, or stdout when it is empty.
template <class Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw cavlab::io::ConfigError("cannot open output file '" + path + "'");
  write(f);
  if (!f) throw cavlab::io::ConfigError("failed writing '" + path + "'");
}

/// `fixed_method` names the only route a command has; it is recorded in the
/// resolved config instead of whatever --method said.
int run_table(const Common& c, cavlab::io::Table (*command)(const cavlab::io::RunConfig&),
              const char* fixed_method = nullptr) {
  auto cfg = resolve(c);
  if (fixed_method) cfg.method = fixed_method;
  const auto table = command(cfg);
  const auto resolved = cavlab::io::config_json(cfg);
  emit(c.out, [&](std::ostream& os) { cavlab::io::write_table(os, table, resolved, cfg.format); });
  return kOk;
}

int run_validate(const Common& c, const std::vector<int>& only) {
  const auto cfg = resolve(c);
  cavlab::validation::ValidationOptions opts;
  opts.seed = cfg.seed;
  const auto criteria = cavlab::validation::all_criteria();
  const std::set<int> wanted(only.begin(), only.end());
  cavlab::validation::json report;
  report["seed"] = cfg.seed;
  report["criteria"] = cavlab::validation::json::array();
  bool failed = false;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto r = criteria[i](opts);
    std::cerr << "criterion " << id << ": " << cavlab::validation::status_name(r.status) << " (" << r.seconds << " s)"
              << (r.detail.empty() ? "" : " " + r.detail) << '\n';
    failed = failed || r.status == cavlab::validation::Status::fail;
    report["criteria"].push_back(cavlab::validation::to_json(r));
  }
  report["passed"] = !failed;
  emit(c.out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
  return failed ? kValidationFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven cavity QED with dephasing: steady states, spectra and phase-space data"};
  app.require_subcommand(1);
  Common common;
  std::vector<int> only;

  auto* profile = app.add_subcommand("profile", "reflection/transmission and photon statistics vs drive frequency");
  auto* spectrum = app.add_subcommand("spectrum", "cavity emission spectrum");
  auto* wigner = app.add_subcommand("wigner", "Wigner function of the cavity steady state");
  auto* height = app.add_subcommand("height-scan", "Lorentzian height h and cooperativity C over a log sweep");
  auto* validate = app.add_subcommand("validate", "run the acceptance criteria and write a JSON report");
  for (auto* cmd : {profile, spectrum, wigner, height, validate}) add_common(cmd, common);
  validate->add_option("--only", only, "criterion ids to run (default: all)")->check(CLI::Range(1, 9));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*profile) return run_table(common, cavlab::cli::profile);
    if (*spectrum) return run_table(common, cavlab::cli::spectrum);
    if (*wigner) return run_table(common, cavlab::cli::wigner, "liouville");
    if (*height) return run_table(common, cavlab::cli::height_scan, "analytic");
    return run_validate(common, only);
  } catch (const std::exception& e) {
    std::cerr << "cavlab: " << e.what() << '\n';
    return kConfigError;
  }
}
