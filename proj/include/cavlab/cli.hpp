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

// Command bodies behind the cavlab executable. Each one turns a resolved
// RunConfig into an io::Table; argument parsing and exit codes live in the
// tool itself.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cavlab/analytic.hpp"
#include "cavlab/detail/parallel.hpp"
#include "cavlab/io.hpp"
#include "cavlab/liouville/probe.hpp"
#include "cavlab/liouville/steady_state.hpp"
#include "cavlab/liouville/wigner.hpp"
#include "cavlab/moments.hpp"
#include "cavlab/spectrum.hpp"

namespace cavlab::cli {

using io::ConfigError;
using io::RunConfig;
using io::Table;

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::string> format;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid;
  std::optional<int> cutoff;
};

inline void apply(RunConfig& c, const Overrides& o) {
  if (o.format) {
    io::check_format(*o.format);
    c.format = *o.format;
  }
  if (o.method) {
    io::check_method(*o.method);
    c.method = *o.method;
  }
  if (o.seed) c.seed = *o.seed;
  if (o.grid) c.grid = io::parse_grid(*o.grid);
  if (o.cutoff) {
    if (*o.cutoff < 1) throw ConfigError("--cutoff must be at least 1");
    c.cutoff = *o.cutoff;
  }
}

/// Parameters handed to the Liouvillian: the atoms are optionally replaced by
/// `collective_atoms` atoms with g rescaled to keep g^2 N.
inline SystemParams liouville_params(const RunConfig& c) {
  if (c.collective_atoms == 0 || c.params.n_atoms == 0) return c.params;
  if (c.params.indiv_rate != 0.0)
    throw ConfigError("collective_atoms needs tau_indiv = inf: individual dephasing couples the non-symmetric modes");
  if (c.atom_model != liouville::AtomModel::oscillator)
    throw ConfigError("collective_atoms needs atom_model = oscillator");
  return with_collective_coupling(c.params, c.collective_atoms);
}

/// Truncated space for the Liouvillian routes. A zero cutoff in the config
/// is replaced by `fallback`.
inline liouville::SpaceSpec system_space(const RunConfig& c, const SystemParams& p, int fallback) {
  liouville::SpaceSpec s;
  s.cavity_cutoff = c.cutoff > 0 ? c.cutoff : fallback;
  s.atom_model = c.atom_model;
  s.atom_cutoff = c.atom_cutoff;
  s.n_atoms = p.n_atoms;
  s.max_excitations = c.max_excitations;
  if (s.max_excitations > 0) {
    s.cavity_cutoff = std::max(s.cavity_cutoff, s.max_excitations);
    if (s.atom_model == liouville::AtomModel::oscillator) s.atom_cutoff = std::max(s.atom_cutoff, s.max_excitations);
  }
  s.check_budget();
  return s;
}

/// Starting cavity cutoff for a mean photon number n: n + 8 sqrt(n) + 8.
inline int cutoff_for_photons(double n) {
  return static_cast<int>(std::ceil(n + 8.0 * std::sqrt(n) + 8.0));
}

inline double moment_photon_number(const SystemParams& p, double omega_L) {
  return moments::steady_state(p, omega_L).s3;
}

/// Solves once at the configured cutoff when one is given, otherwise raises
/// the cutoff until the moments settle.
inline liouville::ConvergedSolution liouville_solution(const RunConfig& c, const SystemParams& p, double omega_L) {
  const int start = c.max_excitations > 0 ? c.max_excitations : cutoff_for_photons(moment_photon_number(p, omega_L));
  const auto space = system_space(c, p, start);
  if (c.cutoff > 0) {
    liouville::ConvergedSolution sol{liouville::steady_state(liouville::build_liouvillian(p, omega_L, space)),
                                     liouville::make_operators(space), {}, 0.0, 0};
    sol.moments = liouville::state_moments(sol.state, sol.ops);
    return sol;
  }
  return liouville::solve_converged(p, omega_L, space);
}

// ---------------------------------------------------------------------------
// profile

inline const std::vector<std::string>& profile_columns() {
  static const std::vector<std::string> cols{"re_r", "im_r", "re_t", "im_t", "R", "T",
                                             "abs_t_sq", "n_cav", "abs_mean_field_sq", "p_exc"};
  return cols;
}

/// Profile row entries (without omega_L) from a mean field, photon number
/// and excitation probability.
inline std::vector<double> profile_row(const SystemParams& p, complex ac, double ncav, double p_exc) {
  if (p.beta == complex{}) throw ConfigError("profile with this method needs beta != 0");
  const complex per = ac / p.beta;
  const complex r = std::sqrt(2.0 * p.kappa1) * per - 1.0;
  const complex t = std::sqrt(2.0 * p.kappa2) * per;
  const double flux = std::norm(p.beta);
  const double R = 1.0 + (2.0 * p.kappa1 * ncav - 2.0 * std::sqrt(2.0 * p.kappa1) * std::real(std::conj(p.beta) * ac)) / flux;
  const double T = 2.0 * p.kappa2 * ncav / flux;
  return {r.real(), r.imag(), t.real(), t.imag(), R, T, std::norm(t), ncav, std::norm(ac), p_exc};
}

inline std::vector<double> analytic_profile_row(const SystemParams& p, double omega_L) {
  const auto co = analytic::intensity_coefficients(p, omega_L);
  const auto s = analytic::steady_state(p, omega_L);
  return {co.r.real(), co.r.imag(), co.t.real(), co.t.imag(), co.R, co.T,
          std::norm(co.t), s.photon_number, std::norm(s.mean_field), s.p_exc};
}

inline std::vector<double> moment_profile_row(const SystemParams& p, double omega_L) {
  const auto m = moments::steady_state(p, omega_L);
  return profile_row(p, m.s1, m.s3, m.s5);
}

inline Table profile(const RunConfig& c) {
  const auto grid = c.grid.points();
  std::vector<std::vector<double>> rows(grid.size());
  const bool cross = c.crosscheck_moments && c.method == "analytic";
  if (c.method == "probe") throw ConfigError("profile supports methods analytic, moments and liouville");
  const SystemParams lp = c.method == "liouville" ? liouville_params(c) : c.params;
  std::vector<double> changes(grid.size(), 0.0);
  cavlab::detail::parallel_for(grid.size(), [&](std::size_t i) {
    std::vector<double> row{grid[i]};
    std::vector<double> body;
    if (c.method == "analytic") {
      body = analytic_profile_row(c.params, grid[i]);
    } else if (c.method == "moments") {
      body = moment_profile_row(c.params, grid[i]);
    } else {
      const auto sol = liouville_solution(c, lp, grid[i]);
      body = profile_row(lp, sol.moments.ac, sol.moments.ncav, sol.moments.p_exc);
      changes[i] = sol.relative_change;
    }
    row.insert(row.end(), body.begin(), body.end());
    if (cross) {
      const auto mom = moment_profile_row(c.params, grid[i]);
      row.insert(row.end(), mom.begin(), mom.end());
    }
    rows[i] = std::move(row);
  });
  Table t;
  t.columns.push_back("omega_L");
  for (const auto& col : profile_columns()) t.columns.push_back(col);
  if (cross)
    for (const auto& col : profile_columns()) t.columns.push_back(col + "_mom");
  t.rows = std::move(rows);
  t.meta["command"] = "profile";
  t.meta["method"] = c.method;
  if (c.method == "liouville") {
    double worst = 0.0;
    for (double ch : changes) worst = std::max(worst, ch);
    t.meta["max_cutoff_change"] = worst;
  }
  return t;
}

// ---------------------------------------------------------------------------
// spectrum

/// Width used to render the coherent delta as a Lorentzian.
inline double render_width(const RunConfig& c) {
  return c.kappa_p > 0.0 ? c.kappa_p : liouville::default_probe_width(c.params);
}

inline Table spectrum(const RunConfig& c) {
  const auto grid = c.grid.points();
  SpectrumResult s;
  io::json check;
  auto regression = [&](std::span<const double> g) {
    const double t_max = c.t_max > 0.0 ? c.t_max : moments::default_regression_window(c.params);
    const double dt = c.dt > 0.0 ? c.dt : moments::default_regression_step(c.params, c.omega_L);
    return moments::regression_spectrum(c.params, c.omega_L, g, t_max, dt);
  };
  auto wide_check = [&](auto&& compute, double n_cav) {
    const auto wide = default_spectrum_grid(c.params);
    const auto w = compute(std::span<const double>(wide));
    const double total = trapezoid(w.grid, w.incoherent_density) + w.coherent_power;
    check = {{"grid", "default wide grid"}, {"total", total}, {"n_cav", n_cav},
             {"rel_err", std::abs(total - n_cav) / n_cav}};
  };
  if (c.method == "analytic") {
    s = analytic::emission_spectrum(c.params, c.omega_L, grid);
    wide_check([&](std::span<const double> g) { return analytic::emission_spectrum(c.params, c.omega_L, g); },
               analytic::steady_state(c.params, c.omega_L).photon_number);
  } else if (c.method == "moments") {
    s = regression(grid);
    wide_check(regression, moment_photon_number(c.params, c.omega_L));
  } else {
    const SystemParams lp = liouville_params(c);
    const int start = c.max_excitations > 0 ? c.max_excitations : cutoff_for_photons(moment_photon_number(lp, c.omega_L));
    const auto space = system_space(c, lp, start);
    liouville::ProbeOptions po;
    po.epsilon = c.epsilon;
    po.kappa_p = render_width(c);
    s = liouville::probe_spectrum(lp, c.omega_L, grid, space, po);
    const auto base = liouville::steady_state(liouville::build_liouvillian(lp, c.omega_L, space));
    const double n_cav = liouville::state_moments(base, liouville::make_operators(space)).ncav;
    const double total = trapezoid(s.grid, s.incoherent_density) + s.coherent_power;
    check = {{"grid", "output grid"}, {"total", total}, {"n_cav", n_cav}, {"rel_err", std::abs(total - n_cav) / n_cav}};
  }
  const double width = render_width(c);
  Table t;
  t.columns = {"omega", "s_incoherent", "s_rendered"};
  for (std::size_t i = 0; i < grid.size(); ++i)
    t.rows.push_back({grid[i], s.incoherent_density[i],
                      s.incoherent_density[i] + s.coherent_power * lorentzian(grid[i], c.omega_L, width)});
  t.meta["command"] = "spectrum";
  t.meta["method"] = c.method == "moments" ? "regression" : s.method;
  t.meta["coherent_power"] = s.coherent_power;
  t.meta["render_width"] = width;
  t.meta["integral_check"] = check;
  if (!s.warnings.empty()) t.meta["warnings"] = s.warnings;
  return t;
}

// ---------------------------------------------------------------------------
// wigner

inline Table wigner(const RunConfig& c) {
  const SystemParams lp = liouville_params(c);
  const auto sol = liouville_solution(c, lp, c.omega_L);
  const auto cavity = liouville::reduce_cavity(sol.state);
  const auto spec = liouville::PhaseSpaceGrid::square(c.wigner_grid.min, c.wigner_grid.max, c.wigner_grid.n);
  liouville::WignerGrid w;
  try {
    w = liouville::wigner(cavity, spec);
  } catch (const liouville::GridError& e) {
    throw ConfigError(e.what());
  }
  const auto gm = liouville::grid_moments(w);
  Table t;
  t.columns = {"x", "p", "W"};
  for (int i = 0; i < spec.nx; ++i)
    for (int j = 0; j < spec.np; ++j) t.rows.push_back({w.x[i], w.p[j], w.w(i, j)});
  t.meta["command"] = "wigner";
  t.meta["wigner_grid"] = {{"min", spec.x_min}, {"max", spec.x_max}, {"n", spec.nx}};
  t.meta["normalization_residual"] = w.normalization_residual;
  t.meta["cavity_cutoff"] = sol.state.space.cavity_cutoff;
  t.meta["cutoff_change"] = sol.relative_change;
  t.meta["mean_field"] = io::detail::complex_json(sol.moments.ac);
  t.meta["n_cav"] = sol.moments.ncav;
  t.meta["coherence_ratio"] = sol.moments.ncav / std::norm(sol.moments.ac);
  t.meta["grid_mean_field"] = io::detail::complex_json(gm.mean_field);
  t.meta["grid_photon_number"] = gm.photon_number;
  return t;
}

// ---------------------------------------------------------------------------
// height scan

inline Table height_scan(const RunConfig& c) {
  const auto values = logspace(c.sweep.min, c.sweep.max, static_cast<std::size_t>(c.sweep.n));
  // For a gamma_par sweep the dephasing time comes from the config
  // (tau_indiv, else tau_common, else 1).
  double fixed_rate = 1.0;
  if (c.params.indiv_rate > 0.0) fixed_rate = c.params.indiv_rate;
  else if (c.params.common_rate > 0.0) fixed_rate = c.params.common_rate;
  Table t;
  t.columns = {"swept_value", "h_individual", "h_common", "C"};
  for (double v : values) {
    SystemParams base = c.params;
    base.jitter_rate = 0.0;
    double rate = fixed_rate;
    if (c.sweep.variable == io::SweepVariable::dephasing_time) rate = 1.0 / v;
    else base.gamma_par = v;
    SystemParams ind = base, com = base;
    ind.indiv_rate = rate;
    ind.common_rate = 0.0;
    com.common_rate = rate;
    com.indiv_rate = 0.0;
    const auto hi = analytic::lorentzian_height(ind);
    const auto hc = analytic::lorentzian_height(com);
    t.rows.push_back({v, hi.h, hc.h, hi.bound_always});
  }
  t.meta["command"] = "height-scan";
  t.meta["swept_variable"] = c.sweep.variable == io::SweepVariable::gamma_par ? "gamma_par" : "dephasing_time";
  return t;
}

}  // namespace cavlab::cli
