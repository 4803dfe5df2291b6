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

// Closed-form steady state of the driven cavity in the linear (low
// excitation) regime: field and intensity coefficients, photon statistics,
// the dephasing fraction, the Lorentzian height and the emission spectra.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "cavlab/model.hpp"
#include "cavlab/spectrum.hpp"

namespace cavlab::analytic {

struct SteadyStateSummary {
  complex mean_field{};        // <a_c>
  double photon_number = 0.0;  // <a_c^+ a_c>
  double p_exc = 0.0;          // atomic excitation probability
  double coherence_ratio = 1.0;  // <a_c^+ a_c> / |<a_c>|^2, drive independent
};

struct FieldCoefficients {
  complex r{};
  complex t{};
};

struct CoefficientSet {
  complex r{};
  complex t{};
  double R = 0.0;
  double T = 0.0;
};

struct HeightReport {
  double h = 0.0;
  double bound_always = 0.0;    // C
  double bound_lifetime = 0.0;  // (2C/gamma_par)(1/tau' + 1/(N tau))
  double fraction = 0.0;        // dephasing fraction
};

/// Coefficients of the 2x2 system [a b; c d][p_exc; n] = [e; f] |<a_c>|^2
/// together with its determinant ad - bc.
struct PopulationSystem {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0, f = 0.0;
  double determinant = 0.0;
};

namespace detail {

inline void require_no_jitter_with_atoms(const SystemParams& p) {
  if (p.n_atoms > 0 && p.jitter_rate != 0.0)
    throw ParamError("tau_jitter",
                     "closed-form photon statistics with atoms assume no cavity jitter; "
                     "use the moment solver instead");
}

/// Sum over atom pairs of <a_k^+ a_j> per unit N p_exc:
/// (1/tau + N gamma_par/2) / (1/tau + gamma_par/2). Exactly N without
/// individual dephasing.
inline double pair_multiplicity(const SystemParams& p) {
  if (p.indiv_rate == 0.0) return static_cast<double>(p.n_atoms);
  return (p.indiv_rate + 0.5 * p.n_atoms * p.gamma_par) / (p.indiv_rate + 0.5 * p.gamma_par);
}

/// <a_c> / beta, exact from the first-moment equations (cavity jitter adds
/// to the field damping).
inline complex field_per_drive(const SystemParams& p, const DerivedRates& d) {
  const complex cav(d.big_gamma, d.delta_c);
  const complex load = p.g * p.g * p.n_atoms / complex(d.gamma_perp, d.delta_a);
  return std::sqrt(2.0 * p.kappa1) / (cav + load);
}

}  // namespace detail

/// Dephasing fraction [gamma_perp/tau + N gamma_par/(2 tau')] / [1/tau + gamma_par/2],
/// evaluated in the rearranged form 1/tau + (1/tau') * pair_multiplicity so that
/// the single-channel and single-atom cases come out exactly.
inline double dephasing_fraction(const SystemParams& p) {
  validate(p);
  return p.indiv_rate + p.common_rate * detail::pair_multiplicity(p);
}

/// Determinant of the population system, expanded form.
inline double determinant(const SystemParams& p) {
  const double k = total_kappa(p);
  const double gp = gamma_perp(p);
  const double dac = p.omega_a - p.omega_c;
  const double s = k + gp;
  return 2.0 * k * p.gamma_par * (s * s + dac * dac) +
         4.0 * k * p.g * p.g * s * (detail::pair_multiplicity(p) + p.n_atoms * p.gamma_par / (2.0 * k));
}

inline SteadyStateSummary empty_cavity_steady_state(const SystemParams& p, double omega_L) {
  validate(p);
  if (p.n_atoms != 0) throw ParamError("n_atoms", "empty-cavity solution requires n_atoms = 0");
  const auto d = derive(p, omega_L);
  SteadyStateSummary s;
  s.mean_field = std::sqrt(2.0 * p.kappa1) * p.beta / complex(d.big_gamma, d.delta_c);
  s.coherence_ratio = 1.0 + p.jitter_rate / d.kappa;
  s.photon_number = s.coherence_ratio * std::norm(s.mean_field);
  return s;
}

inline FieldCoefficients field_coefficients(const SystemParams& p, double omega_L) {
  validate(p);
  const auto d = derive(p, omega_L);
  const complex per_drive = detail::field_per_drive(p, d);  // <a_c>/beta
  return {std::sqrt(2.0 * p.kappa1) * per_drive - 1.0, std::sqrt(2.0 * p.kappa2) * per_drive};
}

/// Photon number, excitation probability and coherence ratio with atoms.
inline SteadyStateSummary cavity_moments(const SystemParams& p, double omega_L) {
  validate(p);
  if (p.n_atoms < 1) throw ParamError("n_atoms", "atom-filled solution requires n_atoms >= 1");
  detail::require_no_jitter_with_atoms(p);
  const auto d = derive(p, omega_L);
  const double g2 = p.g * p.g;
  const double n = p.n_atoms;
  const double k = d.kappa;
  const double gp = d.gamma_perp;
  const double lor = gp * gp + d.delta_a * d.delta_a;
  const double D = determinant(p);
  const double frac = dephasing_fraction(p);

  SteadyStateSummary s;
  s.mean_field = std::sqrt(2.0 * p.kappa1) * p.beta / (complex(k, d.delta_c) * (1.0 + d.v));
  const double field2 = std::norm(s.mean_field);
  s.coherence_ratio = 1.0 + 4.0 * g2 * g2 * n * (k + gp) / (lor * D) * frac;
  s.photon_number = s.coherence_ratio * field2;
  s.p_exc = 2.0 * g2 * field2 * (gp / p.gamma_par) / lor *
            (1.0 - 4.0 * k * g2 * (k + gp) / (gp * D) * frac);
  return s;
}

/// Empty-cavity or atom-filled closed form, whichever applies.
inline SteadyStateSummary steady_state(const SystemParams& p, double omega_L) {
  return p.n_atoms == 0 ? empty_cavity_steady_state(p, omega_L) : cavity_moments(p, omega_L);
}

/// Intensity reflection and transmission. R and T do not depend on |beta|,
/// so they are well defined for beta = 0 as well.
inline CoefficientSet intensity_coefficients(const SystemParams& p, double omega_L) {
  SystemParams unit = p;
  unit.beta = 1.0;
  const auto s = steady_state(unit, omega_L);
  const auto [r, t] = field_coefficients(p, omega_L);
  const double excess = s.coherence_ratio - 1.0;
  const double field2 = std::norm(s.mean_field);  // per unit |beta|^2
  return {r, t, std::norm(r) + 2.0 * p.kappa1 * field2 * excess, std::norm(t) * s.coherence_ratio};
}

/// Residual of the photon-flux balance R + T + N gamma_par p_exc / |beta|^2 - 1.
inline double flux_balance_residual(const SystemParams& p, double omega_L) {
  SystemParams unit = p;
  unit.beta = 1.0;
  const auto c = intensity_coefficients(unit, omega_L);
  const auto s = steady_state(unit, omega_L);
  return c.R + c.T + p.n_atoms * p.gamma_par * s.p_exc - 1.0;
}

/// Pre-factor h of the Lorentzian in <a^+a>/|<a>|^2 = 1 + h gamma_perp^2/(gamma_perp^2 + delta_a^2).
/// The bracket is evaluated at delta_a = 0, where the Lorentzian equals one.
inline HeightReport lorentzian_height(const SystemParams& p) {
  validate(p);
  detail::require_no_jitter_with_atoms(p);
  HeightReport rep;
  rep.fraction = dephasing_fraction(p);
  if (p.n_atoms == 0) return rep;
  const double g2 = p.g * p.g;
  const double k = total_kappa(p);
  const double gp = gamma_perp(p);
  rep.h = 4.0 * g2 * g2 * p.n_atoms * (k + gp) / (gp * gp * determinant(p)) * rep.fraction;
  rep.bound_always = cooperativity(p);
  rep.bound_lifetime = 2.0 * rep.bound_always / p.gamma_par *
                       (p.common_rate + p.indiv_rate / p.n_atoms);
  return rep;
}

inline PopulationSystem population_system(const SystemParams& p, double omega_L) {
  validate(p);
  const auto d = derive(p, omega_L);
  const double g2 = p.g * p.g;
  const double n = p.n_atoms;
  const double k = d.kappa;
  const double gp = d.gamma_perp;
  const double s = k + gp;
  const double lor = gp * gp + d.delta_a * d.delta_a;
  PopulationSystem m;
  m.a = p.gamma_par * (s * s + d.delta_ac * d.delta_ac) + 2.0 * g2 * s * detail::pair_multiplicity(p);
  m.b = -2.0 * g2 * s;
  m.c = n * p.gamma_par;
  m.d = 2.0 * k;
  m.e = 2.0 * g2 / lor *
        (g2 * n * s + k * (gp * gp - d.delta_a * d.delta_a) + gp * (k * k + d.delta_c * d.delta_c) -
         2.0 * gp * d.delta_a * d.delta_c);
  m.f = 2.0 * k + 2.0 * gp * g2 * n / lor;
  m.determinant = m.a * m.d - m.b * m.c;
  return m;
}

struct PopulationSolution {
  double p_exc = 0.0;
  double photon_number = 0.0;
};

/// (p_exc, <a_c^+a_c>) from the 2x2 population system by Cramer's rule.
inline PopulationSolution solve_population_system(const SystemParams& p, double omega_L) {
  const auto m = population_system(p, omega_L);
  const auto d = derive(p, omega_L);
  const double field2 =
      std::norm(std::sqrt(2.0 * p.kappa1) * p.beta / (complex(d.kappa, d.delta_c) * (1.0 + d.v)));
  return {(m.e * m.d - m.b * m.f) / m.determinant * field2,
          (m.a * m.f - m.c * m.e) / m.determinant * field2};
}

/// Incoherent density per unit incoherent area for the atom-filled cavity:
/// the normal-mode profile evaluated at the observation frequency.
inline double normal_mode_profile(const SystemParams& p, double omega) {
  const double g2n = p.g * p.g * p.n_atoms;
  const double k = total_kappa(p);
  const double gp = gamma_perp(p);
  const double dac = p.omega_a - p.omega_c;
  const double num = (k + gp) * (k * gp + g2n) + k * gp * dac * dac / (k + gp);
  const complex den = g2n + complex(k, p.omega_c - omega) * complex(gp, p.omega_a - omega);
  return num / (std::numbers::pi * std::norm(den));
}

inline SpectrumResult emission_spectrum(const SystemParams& p, double omega_L, std::span<const double> grid) {
  validate(p);
  require_monotone(grid);
  SpectrumResult out;
  out.method = "analytic";
  out.grid.assign(grid.begin(), grid.end());
  out.incoherent_density.resize(grid.size());
  if (p.n_atoms == 0) {
    const auto s = empty_cavity_steady_state(p, omega_L);
    const double field2 = std::norm(s.mean_field);
    const double big_gamma = p.jitter_rate + total_kappa(p);
    const double weight = p.jitter_rate / total_kappa(p) * field2;
    out.coherent_power = field2;
    for (std::size_t i = 0; i < grid.size(); ++i)
      out.incoherent_density[i] = weight * lorentzian(grid[i], p.omega_c, big_gamma);
    return out;
  }
  const auto s = cavity_moments(p, omega_L);
  const double field2 = std::norm(s.mean_field);
  const double gp = gamma_perp(p);
  const double da = p.omega_a - omega_L;
  const double h = lorentzian_height(p).h;
  const double weight = h * gp * gp / (gp * gp + da * da) * field2;
  out.coherent_power = field2;
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.incoherent_density[i] = weight * normal_mode_profile(p, grid[i]);
  return out;
}

}  // namespace cavlab::analytic
