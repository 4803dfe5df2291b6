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

// Acceptance checks. Each criterion runs the relevant oracles, records its
// metrics and wall time, and reports pass, fail or skipped (with a reason)
// when a request exceeds the Hilbert-space budget.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavlab/analytic.hpp"
#include "cavlab/liouville/operators.hpp"
#include "cavlab/liouville/probe.hpp"
#include "cavlab/liouville/steady_state.hpp"
#include "cavlab/liouville/stochastic.hpp"
#include "cavlab/liouville/wigner.hpp"
#include "cavlab/model.hpp"
#include "cavlab/moments.hpp"
#include "cavlab/spectrum.hpp"

namespace cavlab::validation {

using json = nlohmann::ordered_json;

enum class Status { pass, fail, skipped };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    default: return "skipped";
  }
}

struct CriterionResult {
  int id = 0;
  std::string title;
  Status status = Status::fail;
  std::string detail;  // failed checks, or the skip reason
  json metrics = json::object();
  double seconds = 0.0;
  double time_limit = 0.0;  // 0 means no limit
};

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = cavlab::detail::worker_count();
};

namespace detail {

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double rel_err(complex a, complex b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Collects named checks and builds the detail string from the failures.
class Checks {
 public:
  explicit Checks(json& metrics) : metrics_(metrics) {}

  /// Records value <= limit under `name`.
  bool at_most(const std::string& name, double value, double limit) {
    metrics_[name] = value;
    const bool ok = value <= limit;  // NaN fails
    if (!ok) fail(name + " = " + io_number(value) + " exceeds " + io_number(limit));
    return ok;
  }

  bool at_least(const std::string& name, double value, double limit) {
    metrics_[name] = value;
    const bool ok = value >= limit;
    if (!ok) fail(name + " = " + io_number(value) + " is below " + io_number(limit));
    return ok;
  }

  bool holds(const std::string& name, bool ok, const std::string& why = {}) {
    metrics_[name] = ok;
    if (!ok) fail(name + (why.empty() ? "" : ": " + why));
    return ok;
  }

  void record(const std::string& name, json value) { metrics_[name] = std::move(value); }

  void fail(const std::string& what) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += what;
  }

  bool ok() const { return detail_.empty(); }
  const std::string& detail() const { return detail_; }

  static std::string io_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

 private:
  json& metrics_;
  std::string detail_;
};

template <class Body>
CriterionResult run_timed(int id, std::string title, double time_limit, Body&& body) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  r.time_limit = time_limit;
  const auto t0 = std::chrono::steady_clock::now();
  Checks checks(r.metrics);
  try {
    body(checks);
    r.status = checks.ok() ? Status::pass : Status::fail;
    r.detail = checks.detail();
  } catch (const liouville::BudgetError& e) {
    r.status = Status::skipped;
    r.detail = e.what();
  } catch (const std::exception& e) {
    r.status = Status::fail;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.metrics["seconds"] = r.seconds;
  if (r.status == Status::pass && time_limit > 0.0 && r.seconds > time_limit) {
    r.status = Status::fail;
    r.detail = "runtime " + Checks::io_number(r.seconds) + " s exceeds " + Checks::io_number(time_limit) + " s";
  }
  return r;
}

/// Shared parameter set of the transmission, height and spectrum figures:
/// g = 2, N = 5, kappa1 = kappa2 = 0.5, omega_a = omega_c = 0, gamma_par = 2.
inline SystemParams figure_params() {
  SystemParams p;
  p.g = 2.0;
  p.n_atoms = 5;
  p.kappa1 = 0.5;
  p.kappa2 = 0.5;
  p.gamma_par = 2.0;
  return p;
}

/// gamma_perp = 2 gamma_par through common dephasing.
inline SystemParams dashed_params() {
  SystemParams p = figure_params();
  p.common_rate = 3.0;
  return p;
}

/// gamma_perp = 2 gamma_par through individual dephasing.
inline SystemParams solid_params() {
  SystemParams p = figure_params();
  p.indiv_rate = 3.0;
  return p;
}

struct RandomDraw {
  SystemParams params;
  std::vector<double> drive_frequencies;
};

/// Log-uniform rates in [1e-2, 1e2], N from {1, 2, 3, 5, 20}, atom-cavity
/// detuning uniform in [-5, 5], and 11 drive frequencies spanning the
/// response around the cavity.
inline std::vector<RandomDraw> random_draws(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_rate(-2.0, 2.0);
  std::uniform_real_distribution<double> detuning(-5.0, 5.0);
  std::uniform_int_distribution<int> pick(0, 4);
  const int atoms[] = {1, 2, 3, 5, 20};
  auto rate = [&] { return std::pow(10.0, log_rate(rng)); };
  std::vector<RandomDraw> out;
  for (int i = 0; i < count; ++i) {
    RandomDraw d;
    SystemParams& p = d.params;
    p.n_atoms = atoms[pick(rng)];
    p.g = rate();
    p.kappa1 = rate();
    p.kappa2 = rate();
    p.gamma_par = rate();
    p.indiv_rate = rate();
    p.common_rate = rate();
    p.omega_c = 0.0;
    p.omega_a = detuning(rng);
    p.beta = 1.0;
    const double width =
        std::max({total_kappa(p), gamma_perp(p), p.g * std::sqrt(static_cast<double>(p.n_atoms)), std::abs(p.omega_a)});
    d.drive_frequencies = linspace(-3.0 * width, 3.0 * width, 11);
    out.push_back(std::move(d));
  }
  return out;
}

/// Relative energy-balance residual of a Liouvillian steady state.
inline double liouville_energy_residual(const liouville::StateMoments& m, const SystemParams& p) {
  const double input = 2.0 * std::sqrt(2.0 * p.kappa1) * std::real(std::conj(p.beta) * m.ac);
  const double out = 2.0 * total_kappa(p) * m.ncav + p.n_atoms * p.gamma_par * m.p_exc;
  return std::abs(out - input) / std::abs(input);
}

inline liouville::SpaceSpec capped_space(int n_atoms, int cap, liouville::AtomModel model = liouville::AtomModel::oscillator) {
  return {cap, model, model == liouville::AtomModel::oscillator ? cap : 1, n_atoms, false, cap};
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace detail

// 1. Closed-form photon number and excitation against the moment solve.
inline CriterionResult analytic_moment_equivalence(const ValidationOptions& o) {
  return detail::run_timed(1, "analytic vs moment steady state", 10.0, [&](detail::Checks& c) {
    double worst = 0.0, worst_field = 0.0;
    int samples = 0;
    for (const auto& d : detail::random_draws(o.seed, 100)) {
      for (double wl : d.drive_frequencies) {
        const auto a = analytic::cavity_moments(d.params, wl);
        const auto m = moments::steady_state(d.params, wl);
        worst = std::max({worst, detail::rel_err(a.photon_number, m.s3), detail::rel_err(a.p_exc, m.s5)});
        worst_field = std::max(worst_field, detail::rel_err(a.mean_field, m.s1));
        ++samples;
      }
    }
    c.record("samples", samples);
    c.at_most("max_rel_err_photon_and_excitation", worst, 1e-9);
    c.at_most("max_rel_err_mean_field", worst_field, 1e-9);
  });
}


// 2. Energy conservation and flux balance in both oracles.
inline CriterionResult energy_conservation(const ValidationOptions& o) {
  return detail::run_timed(2, "energy conservation and flux balance", 0.0, [&](detail::Checks& c) {
    double worst_mom = 0.0, worst_flux_mom = 0.0, worst_flux_analytic = 0.0;
    for (const auto& d : detail::random_draws(o.seed, 100)) {
      for (double wl : d.drive_frequencies) {
        const auto m = moments::steady_state(d.params, wl);
        const double input = 2.0 * std::sqrt(2.0 * d.params.kappa1) * std::real(std::conj(d.params.beta) * m.s1);
        worst_mom = std::max(worst_mom, std::abs(moments::energy_balance_residual(m, d.params)) / std::abs(input));
        const auto in = moments::intensities(m, d.params);
        const double flux = in.R + in.T + d.params.n_atoms * d.params.gamma_par * m.s5 / std::norm(d.params.beta);
        worst_flux_mom = std::max(worst_flux_mom, std::abs(flux - 1.0));
        worst_flux_analytic = std::max(worst_flux_analytic, std::abs(analytic::flux_balance_residual(d.params, wl)));
      }
    }
    c.at_most("moments_energy_rel_residual", worst_mom, 1e-10);
    c.at_most("moments_flux_residual", worst_flux_mom, 1e-10);
    c.at_most("analytic_flux_residual", worst_flux_analytic, 1e-10);

    struct Case {
      const char* name;
      SystemParams p;
      liouville::SpaceSpec space;
    };
    SystemParams solid2 = detail::solid_params();
    solid2.n_atoms = 2;
    solid2.beta = 0.01;
    SystemParams dashed3 = with_collective_coupling(detail::dashed_params(), 3);
    dashed3.beta = 0.01;
    SystemParams empty = detail::figure_params();
    empty.n_atoms = 0;
    empty.jitter_rate = 1.0;
    empty.beta = 0.5;
    const Case cases[] = {{"individual_n2", solid2, detail::capped_space(2, 2)},
                          {"common_n3", dashed3, detail::capped_space(3, 2)},
                          {"empty_jitter", empty, {12, liouville::AtomModel::oscillator, 1, 0, false, 0}}};
    double worst_l = 0.0, worst_flux_l = 0.0, worst_change = 0.0;
    for (const auto& k : cases) {
      const auto sol = liouville::solve_converged(k.p, 0.0, k.space);
      const double res = detail::liouville_energy_residual(sol.moments, k.p);
      c.record(std::string("liouville_energy_rel_residual_") + k.name, res);
      worst_l = std::max(worst_l, res);
      const double flux = std::norm(k.p.beta);
      const double r = 1.0 + (2.0 * k.p.kappa1 * sol.moments.ncav -
                              2.0 * std::sqrt(2.0 * k.p.kappa1) * std::real(std::conj(k.p.beta) * sol.moments.ac)) /
                                 flux;
      const double t = 2.0 * k.p.kappa2 * sol.moments.ncav / flux;
      worst_flux_l = std::max(worst_flux_l, std::abs(r + t + k.p.n_atoms * k.p.gamma_par * sol.moments.p_exc / flux - 1.0));
      worst_change = std::max(worst_change, sol.relative_change);
    }
    c.record("liouville_cutoff_change", worst_change);
    c.at_most("liouville_energy_rel_residual", worst_l, 1e-6);
    c.at_most("liouville_flux_residual", worst_flux_l, 1e-6);
  });
}

// 3. Transmission profiles of the three dephasing configurations.
inline CriterionResult transmission_figure(const ValidationOptions&) {
  return detail::run_timed(3, "transmission profiles and Lorentzian height", 60.0, [&](detail::Checks& c) {
    const auto grid = linspace(-10.0, 10.0, 401);
    SystemParams dotted = detail::figure_params();
    std::vector<double> t(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) t[i] = analytic::intensity_coefficients(dotted, grid[i]).T;
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i)
      if (t[i] > t[i - 1] && t[i] >= t[i + 1]) peaks.push_back(grid[i]);
    const double split = dotted.g * std::sqrt(static_cast<double>(dotted.n_atoms));
    c.record("dotted_maxima", peaks);
    if (c.holds("dotted_two_maxima", peaks.size() == 2, std::to_string(peaks.size()) + " maxima found")) {
      c.at_most("dotted_lower_peak_offset", std::abs(peaks[0] + split), 0.2);
      c.at_most("dotted_upper_peak_offset", std::abs(peaks[1] - split), 0.2);
    }

    const SystemParams dashed = detail::dashed_params();
    const SystemParams solid = detail::solid_params();
    bool above = true;
    for (double wl : grid) {
      const auto cd = analytic::intensity_coefficients(dashed, wl);
      above = above && cd.T > std::norm(cd.t);
      (void)analytic::intensity_coefficients(solid, wl);
    }
    c.holds("dashed_T_above_abs_t_sq", above);

    const double h = analytic::lorentzian_height(dashed).h;
    c.record("analytic_h", h);
    const auto m = moments::steady_state(dashed, 0.0);
    const auto in = moments::intensities(m, dashed);
    c.at_most("moments_height_rel_err", detail::rel_err(in.T / in.abs_t_sq - 1.0, h), 1e-9);

    SystemParams reduced = with_collective_coupling(dashed, 3);
    reduced.beta = 0.01;
    const auto sol = liouville::solve_converged(reduced, 0.0, detail::capped_space(3, 2));
    const double ratio = sol.moments.ncav / std::norm(sol.moments.ac) - 1.0;
    c.record("liouville_height", ratio);
    c.record("liouville_cutoff_change", sol.relative_change);
    c.at_most("liouville_height_rel_err", detail::rel_err(ratio, h), 1e-3);
  });
}

// 4. Empty cavity with phase noise: coherence ratio and Wigner moments.
inline CriterionResult empty_cavity_jitter(const ValidationOptions&) {
  return detail::run_timed(4, "empty cavity phase noise and Wigner moments", 120.0, [&](detail::Checks& c) {
    const double noise[] = {0.0, 0.1, 0.3, 1.0};
    json rows = json::array();
    for (double r : noise) {
      SystemParams p = detail::figure_params();
      p.n_atoms = 0;
      p.jitter_rate = r * total_kappa(p);
      p.beta = empty_cavity_drive_for_field(p, 0.0, 2.0);
      const auto sol = liouville::solve_converged(p, 0.0, {30, liouville::AtomModel::oscillator, 1, 0, false, 0});
      const double ratio = sol.moments.ncav / std::norm(sol.moments.ac);
      const auto cav = liouville::reduce_cavity(sol.state);
      const auto w = liouville::wigner(cav, liouville::PhaseSpaceGrid::square(-8.0, 8.0, 321));
      const auto gm = liouville::grid_moments(w);
      const double grid_ratio = gm.photon_number / std::norm(gm.mean_field);
      rows.push_back({{"inverse_kappa_tau_jitter", r},
                      {"coherence_ratio", ratio},
                      {"wigner_ratio", grid_ratio},
                      {"wigner_normalization_residual", w.normalization_residual},
                      {"cutoff", sol.state.space.cavity_cutoff},
                      {"cutoff_change", sol.relative_change}});
      const std::string tag = "_" + detail::Checks::io_number(r);
      c.at_most("coherence_ratio_err" + tag, std::abs(ratio - (1.0 + r)), 1e-3);
      c.at_most("wigner_ratio_rel_err" + tag, std::abs(grid_ratio / (1.0 + r) - 1.0), 1e-2);
    }
    c.record("panels", rows);
  });
}

// 5. Emission spectrum from the closed form, quantum regression and the probe cavity.
inline CriterionResult spectrum_agreement(const ValidationOptions& o) {
  return detail::run_timed(5, "emission spectrum triple agreement", 300.0, [&](detail::Checks& c) {
    struct Case {
      const char* name;
      SystemParams p;
      double omega_L;
    };
    SystemParams noisy = detail::dashed_params();
    noisy.beta = 0.05;
    SystemParams quiet = detail::figure_params();
    quiet.beta = 0.05;
    const Case cases[] = {{"solid", noisy, 0.0}, {"dashed", noisy, 8.0}, {"dotted", quiet, 0.0}};
    const auto grid = linspace(-12.0, 12.0, 97);
    liouville::ProbeOptions po;
    po.kappa_p = 1e-2 / std::numbers::pi;
    po.threads = o.threads;
    for (const auto& k : cases) {
      const std::string tag = std::string("_") + k.name;
      const auto an = analytic::emission_spectrum(k.p, k.omega_L, grid);
      const auto rg = moments::regression_spectrum(k.p, k.omega_L, grid, moments::default_regression_window(k.p),
                                                moments::default_regression_step(k.p, k.omega_L));
      // Only common dephasing: the symmetric atomic mode carries everything,
      // so one atom with coupling g sqrt(N) is exact.
      const SystemParams one = with_collective_coupling(k.p, 1);
      const auto pr = liouville::probe_spectrum(one, k.omega_L, grid, detail::capped_space(1, 4), po);
      const auto pr_low = liouville::probe_spectrum(one, k.omega_L, grid, detail::capped_space(1, 2), po);
      double peak = 0.0;
      for (double v : an.incoherent_density) peak = std::max(peak, v);
      double ar = 0.0, ap = 0.0, rp = 0.0, conv = 0.0, floor_rg = 0.0, floor_pr = 0.0;
      int counted = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        floor_rg = std::max(floor_rg, std::abs(rg.incoherent_density[i]));
        floor_pr = std::max(floor_pr, std::abs(pr.incoherent_density[i]));
        if (peak == 0.0 || an.incoherent_density[i] <= 0.01 * peak) continue;
        ++counted;
        ar = std::max(ar, detail::rel_err(an.incoherent_density[i], rg.incoherent_density[i]));
        ap = std::max(ap, detail::rel_err(an.incoherent_density[i], pr.incoherent_density[i]));
        rp = std::max(rp, detail::rel_err(rg.incoherent_density[i], pr.incoherent_density[i]));
        conv = std::max(conv, detail::rel_err(pr.incoherent_density[i], pr_low.incoherent_density[i]));
      }
      c.record("compared_points" + tag, counted);
      c.record("probe_cutoff_change" + tag, conv);
      c.holds("probe_no_backaction" + tag, pr.warnings.empty());
      if (peak == 0.0) {
        // No phase noise: every method must return an empty incoherent part.
        c.at_most("regression_floor" + tag, floor_rg / an.coherent_power, 1e-8);
        // The probe readout divides by pi kappa_p epsilon^2, which lifts the
        // rounding floor of the joint solve to about 1e-8 of the coherent power.
        c.at_most("probe_floor" + tag, floor_pr / an.coherent_power, 1e-6);
      } else {
        c.at_most("analytic_vs_regression" + tag, ar, 0.02);
        c.at_most("analytic_vs_probe" + tag, ap, 0.02);
        c.at_most("regression_vs_probe" + tag, rp, 0.02);
      }

      const auto wide = default_spectrum_grid(k.p);
      const auto an_w = analytic::emission_spectrum(k.p, k.omega_L, wide);
      const double n_an = analytic::steady_state(k.p, k.omega_L).photon_number;
      c.at_most("analytic_integral_rel_err" + tag,
                detail::rel_err(trapezoid(an_w.grid, an_w.incoherent_density) + an_w.coherent_power, n_an), 1e-3);
      const auto rg_w = moments::regression_spectrum(k.p, k.omega_L, wide, moments::default_regression_window(k.p),
                                                moments::default_regression_step(k.p, k.omega_L));
      const double n_mom = moments::steady_state(k.p, k.omega_L).s3;
      c.at_most("regression_integral_rel_err" + tag,
                detail::rel_err(trapezoid(rg_w.grid, rg_w.incoherent_density) + rg_w.coherent_power, n_mom), 1e-3);
    }
  });
}

// 6. Limits of the dephasing fraction and the Lorentzian height.
inline CriterionResult height_limits(const ValidationOptions& o) {
  return detail::run_timed(6, "dephasing fraction and height limits", 0.0, [&](detail::Checks& c) {
    SystemParams p = detail::figure_params();
    c.at_most("fraction_no_dephasing", std::abs(analytic::dephasing_fraction(p)), 0.0);
    // One channel dominant by a factor of 1000.
    SystemParams ind = p;
    ind.indiv_rate = 1.0;
    ind.common_rate = 1e-3;
    c.at_most("fraction_individual_limit_rel_err", detail::rel_err(analytic::dephasing_fraction(ind), ind.indiv_rate), 0.01);
    SystemParams com = p;
    com.common_rate = 1.0;
    com.indiv_rate = 1e-3;
    c.at_most("fraction_common_limit_rel_err",
              detail::rel_err(analytic::dephasing_fraction(com), p.n_atoms * com.common_rate), 0.01);
    SystemParams one = p;
    one.n_atoms = 1;
    one.indiv_rate = 0.7;
    one.common_rate = 0.4;
    c.at_most("fraction_single_atom_rel_err", detail::rel_err(analytic::dephasing_fraction(one), 1.1), 1e-15);

    double worst = -kInfinity;
    for (const auto& d : detail::random_draws(o.seed, 100)) {
      const auto rep = analytic::lorentzian_height(d.params);
      worst = std::max(worst, rep.h / rep.bound_always);
    }
    c.at_most("max_h_over_C", worst, 1.0);

    SystemParams slow = p;
    slow.gamma_par = 1e-4;
    slow.indiv_rate = 1.0;
    const auto rep = analytic::lorentzian_height(slow);
    c.record("h_small_gamma_par", rep.h);
    c.record("C_small_gamma_par", rep.bound_always);
    c.at_most("h_vs_C_rel_err", detail::rel_err(rep.h, rep.bound_always), 0.01);

    const std::vector<double> taus{1e3, 1e4};
    for (const char* channel : {"individual", "common"}) {
      std::vector<double> hs;
      for (double tau : taus) {
        SystemParams q = p;
        (std::string(channel) == "individual" ? q.indiv_rate : q.common_rate) = 1.0 / tau;
        hs.push_back(analytic::lorentzian_height(q).h);
      }
      c.at_most(std::string("lifetime_slope_err_") + channel, std::abs(detail::loglog_slope(taus, hs) + 1.0), 0.05);
    }
  });
}

// 7. Averaging a white-noise Hamiltonian reproduces the Lindblad term.
inline CriterionResult stochastic_check(const ValidationOptions& o) {
  return detail::run_timed(7, "fluctuating Hamiltonian vs Lindblad", 180.0, [&](detail::Checks& c) {
    const double kappa = 1.0;
    const auto prob = liouville::cavity_number_problem(14, 1.0, 2.0, 0.0, 0.5 * kappa);
    liouville::StochasticOptions so;
    so.t_end = 1.0 / kappa;
    so.dt = 1e-3;
    so.n_traj = 10000;
    so.seed = o.seed;
    so.threads = o.threads;
    const auto main = liouville::stochastic_dephasing_check(prob, so);
    c.at_most("trace_distance", main.trace_distance, 0.03);

    // Average over independent replicas to steady the slope estimate.
    const std::vector<double> counts{1000, 4000, 16000};
    std::vector<double> dist;
    constexpr int kReplicas = 4;
    for (double n : counts) {
      double acc = 0.0;
      for (int r = 0; r < kReplicas; ++r) {
        liouville::StochasticOptions s = so;
        s.n_traj = static_cast<std::size_t>(n);
        s.seed = o.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r + 1));
        acc += liouville::stochastic_dephasing_check(prob, s).trace_distance;
      }
      dist.push_back(acc / kReplicas);
    }
    c.record("mean_distances", dist);
    c.at_most("scaling_slope_err", std::abs(detail::loglog_slope(counts, dist) + 0.5), 0.15);

    liouville::StochasticProblem silent = prob;
    silent.diffusion_D = 0.0;
    liouville::StochasticOptions few = so;
    few.n_traj = 16;
    c.at_most("noise_free_distance", liouville::stochastic_dephasing_check(silent, few).trace_distance, 1e-10);
  });
}

// 8. Without dephasing the cavity steady state is a pure coherent state.
inline CriterionResult coherence_preservation(const ValidationOptions& o) {
  return detail::run_timed(8, "coherent steady state without dephasing", 0.0, [&](detail::Checks& c) {
    SystemParams p = detail::figure_params();
    p.n_atoms = 2;
    p.beta = 0.2;
    const double wl = p.g * std::sqrt(2.0);
    liouville::ConvergenceOptions conv;
    conv.cavity_step = 1;
    const auto sol = liouville::solve_converged(p, wl, detail::capped_space(2, 3), conv);
    const auto cav = liouville::reduce_cavity(sol.state);
    const complex expected = analytic::cavity_moments(p, wl).mean_field;
    c.record("mean_field", std::abs(expected));
    c.at_least("purity", cav.purity(), 1.0 - 1e-6);
    c.at_least("fidelity", liouville::coherent_fidelity(cav, expected), 1.0 - 1e-6);

    double worst = 0.0;
    for (const auto& d : detail::random_draws(o.seed, 100)) {
      SystemParams q = d.params;
      q.indiv_rate = q.common_rate = 0.0;
      for (double w : d.drive_frequencies) {
        const auto m = moments::steady_state(q, w);
        const double scale = std::norm(m.s1) + std::norm(m.s2);
        double r = std::max({std::abs(m.s3 - std::norm(m.s1)), std::abs(m.s5 - std::norm(m.s2)),
                             std::abs(m.s4 - std::conj(m.s1) * m.s2)});
        if (q.n_atoms >= 2) r = std::max(r, std::abs(m.s6 - std::norm(m.s2)));
        worst = std::max(worst, r / scale);
      }
    }
    c.at_most("moment_factorization_residual", worst, 1e-12);
  });
}

// 9. Two-level atoms against oscillators: agreement at weak drive, saturation at strong drive.
inline CriterionResult linear_regime(const ValidationOptions&) {
  return detail::run_timed(9, "linear-regime diagnostic", 0.0, [&](detail::Checks& c) {
    SystemParams p = detail::solid_params();
    p.n_atoms = 2;
    p.beta = 1.0;
    const double unit_exc = analytic::cavity_moments(p, 0.0).p_exc;  // per unit |beta|^2
    const double t_linear = analytic::intensity_coefficients(p, 0.0).T;

    SystemParams weak = p;
    weak.beta = std::sqrt(5e-3 / unit_exc);
    const auto hp = liouville::solve_converged(weak, 0.0, detail::capped_space(2, 4));
    const auto tl = liouville::solve_converged(weak, 0.0, detail::capped_space(2, 4, liouville::AtomModel::two_level));
    const double flux = std::norm(weak.beta);
    const double t_hp = 2.0 * weak.kappa2 * hp.moments.ncav / flux;
    const double t_tl = 2.0 * weak.kappa2 * tl.moments.ncav / flux;
    c.record("weak_p_exc", hp.moments.p_exc);
    c.at_most("weak_p_exc_below_1e-2", hp.moments.p_exc, 1e-2);
    c.record("weak_T_rel_diff", detail::rel_err(t_hp, t_tl));
    c.at_most("weak_T_rel_diff_over_p_exc", detail::rel_err(t_hp, t_tl) / hp.moments.p_exc, 5.0);
    c.at_most("weak_hp_vs_closed_form", detail::rel_err(t_hp, t_linear), 1e-6);

    // Expected divergence: the closed form only holds in the linear regime.
    SystemParams strong = p;
    strong.beta = std::sqrt(0.3 / unit_exc);
    liouville::ConvergenceOptions conv;
    conv.tolerance = 1e-6;
    const auto sat = liouville::solve_converged(strong, 0.0, {8, liouville::AtomModel::two_level, 1, 2, false, 0}, conv);
    const double t_sat = 2.0 * strong.kappa2 * sat.moments.ncav / std::norm(strong.beta);
    c.record("strong_p_exc", sat.moments.p_exc);
    c.record("strong_cavity_cutoff", sat.state.space.cavity_cutoff);
    c.at_least("strong_T_deviation", detail::rel_err(t_sat, t_linear), 0.05);
  });
}

using Criterion = std::function<CriterionResult(const ValidationOptions&)>;

inline std::vector<Criterion> all_criteria() {
  return {analytic_moment_equivalence, energy_conservation, transmission_figure,
          empty_cavity_jitter,         spectrum_agreement,  height_limits,
          stochastic_check,            coherence_preservation, linear_regime};
}

inline json to_json(const CriterionResult& r) {
  json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["status"] = status_name(r.status);
  j["detail"] = r.detail;
  j["seconds"] = r.seconds;
  if (r.time_limit > 0.0) j["time_limit"] = r.time_limit;
  j["metrics"] = r.metrics;
  return j;
}

}  // namespace cavlab::validation
