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

// Emission spectrum sampled by a weakly coupled narrow-band probe cavity.
// At each observation frequency a two-level probe mode, detuned by
// omega - omega_L and coupled with g_p = epsilon kappa_p, is attached to the
// system and the joint steady state is solved. The probe occupation divided
// by pi kappa_p epsilon^2 is the cavity spectrum convolved with a Lorentzian
// of half-width kappa_p.
//
// The probe occupation is read off through the steady-state flux identity
// kappa_p <a_p^+ a_p> = -g_p Im <a_c^+ a_p>, which holds exactly for the
// truncated model. The coherence <a_c^+ a_p> is first order in epsilon while
// the occupation is second order, so this keeps the signal well above the
// rounding floor of the linear solve.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cavlab/detail/parallel.hpp"
#include "cavlab/liouville/steady_state.hpp"
#include "cavlab/spectrum.hpp"

namespace cavlab::liouville {

struct ProbeOptions {
  double epsilon = 1e-3;
  double kappa_p = 0.0;  // 0 selects (smallest system rate) / 100
  unsigned threads = cavlab::detail::worker_count();
};

/// Smallest non-zero rate among kappa, gamma_par, gamma_perp and the noise
/// rates, divided by 100.
inline double default_probe_width(const SystemParams& p) {
  double smallest = total_kappa(p);
  auto consider = [&](double r) {
    if (r > 0.0) smallest = std::min(smallest, r);
  };
  if (p.n_atoms > 0) {
    consider(p.gamma_par);
    consider(gamma_perp(p));
    consider(p.indiv_rate);
    consider(p.common_rate);
  }
  consider(p.jitter_rate);
  return smallest / 100.0;
}

struct ProbeSample {
  double probe_number = 0.0;  // <a_p^+ a_p> from the flux identity
  complex probe_field{};      // <a_p>
  complex cavity_field{};     // <a_c> with the probe attached
};

/// Joint steady state for one probe detuning.
inline ProbeSample probe_sample(const SystemParams& p, double omega_L, const SpaceSpec& system_space,
                                const ProbeCoupling& coupling, const SteadyStateOptions& solver = {}) {
  SpaceSpec space = system_space;
  space.probe_enabled = true;
  const auto ops = make_operators(space);
  const auto l = assemble_liouvillian(space, hamiltonian(p, omega_L, ops, &coupling),
                                      collapse_operators(p, ops, &coupling));
  const auto state = steady_state(l, solver);
  ProbeSample s;
  const complex cross = expectation(state, ops.restrict(SpMat(ops.a_c.adjoint() * ops.a_p)));
  s.probe_number = -coupling.coupling / coupling.kappa_p * cross.imag();
  s.probe_field = expectation(state, ops.restrict(ops.a_p));
  s.cavity_field = expectation(state, ops.restrict(ops.a_c));
  return s;
}

/// Probe-cavity spectrum on `grid`. `system_space` fixes the truncation of the
/// cavity and atoms; the probe mode is added here.
inline SpectrumResult probe_spectrum(const SystemParams& p, double omega_L, std::span<const double> grid,
                                     const SpaceSpec& system_space, const ProbeOptions& opts = {}) {
  validate(p);
  require_monotone(grid);
  if (system_space.n_atoms != p.n_atoms)
    throw std::invalid_argument("probe_spectrum: space n_atoms differs from params n_atoms");
  if (!(opts.epsilon > 0.0)) throw std::invalid_argument("probe_spectrum: epsilon must be positive");
  const double kappa_p = opts.kappa_p > 0.0 ? opts.kappa_p : default_probe_width(p);
  SpaceSpec probed = system_space;
  probed.probe_enabled = true;
  probed.check_budget();

  // Coherent amplitude of the unperturbed system, for the rendered delta.
  const auto base = steady_state(build_liouvillian(p, omega_L, system_space));
  const auto base_ops = make_operators(system_space);
  const complex mean = expectation(base, base_ops.restrict(base_ops.a_c));
  const double coherent = std::norm(mean);

  SpectrumResult out;
  out.method = "probe";
  out.coherent_power = coherent;
  out.grid.assign(grid.begin(), grid.end());
  out.incoherent_density.resize(grid.size());
  std::vector<ProbeSample> samples(grid.size());
  const double norm = std::numbers::pi * kappa_p * opts.epsilon * opts.epsilon;
  cavlab::detail::parallel_for(
      grid.size(),
      [&](std::size_t i) {
        const ProbeCoupling c{grid[i] - omega_L, opts.epsilon * kappa_p, kappa_p};
        samples[i] = probe_sample(p, omega_L, system_space, c);
      },
      opts.threads);
  std::size_t backaction = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double total = samples[i].probe_number / norm;
    out.incoherent_density[i] = total - coherent * lorentzian(grid[i], omega_L, kappa_p);
    if (std::abs(samples[i].probe_field) > 2.0 * opts.epsilon * std::abs(mean)) ++backaction;
  }
  if (backaction > 0)
    out.warnings.push_back("probe back-action: |<a_p>| exceeds 2 epsilon |<a_c>| at " + std::to_string(backaction) +
                           " grid points");
  return out;
}

}  // namespace cavlab::liouville
