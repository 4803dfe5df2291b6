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

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace cavlab {

using complex = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr complex kI{0.0, 1.0};

/// Raised when a parameter record violates one of its invariants. `field()`
/// names the offending entry so callers can report it without parsing text.
class ParamError : public std::invalid_argument {
 public:
  ParamError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Converts a correlation/dephasing time to its rate; an infinite time is a
/// channel that is switched off and maps to exactly zero.
inline double rate_from_time(double tau) { return std::isinf(tau) ? 0.0 : 1.0 / tau; }
inline double time_from_rate(double rate) { return rate == 0.0 ? kInfinity : 1.0 / rate; }

/// One physical configuration: a driven two-mirror cavity holding N identical
/// two-level atoms. Angular frequencies and rates share one (arbitrary) unit.
///
/// The three noise channels are stored as rates (1/tau); zero means off.
struct SystemParams {
  double g = 0.0;         // atom-cavity coupling, identical for every atom
  int n_atoms = 0;        // N; zero is the empty cavity
  double kappa1 = 0.5;    // field decay through the input mirror
  double kappa2 = 0.5;    // field decay through the output mirror
  double omega_c = 0.0;   // cavity resonance
  double omega_a = 0.0;   // atomic resonance
  double gamma_par = 2.0; // atomic population decay
  double indiv_rate = 0.0;   // 1/tau, per-atom dephasing
  double common_rate = 0.0;  // 1/tau', dephasing shared by all atoms
  double jitter_rate = 0.0;  // 1/tau_jit, cavity phase noise
  complex beta{1.0, 0.0};    // |beta|^2 = incident photons per unit time

  double tau_indiv() const { return time_from_rate(indiv_rate); }
  double tau_common() const { return time_from_rate(common_rate); }
  double tau_jitter() const { return time_from_rate(jitter_rate); }

  SystemParams& set_tau_indiv(double tau) { indiv_rate = rate_from_time(tau); return *this; }
  SystemParams& set_tau_common(double tau) { common_rate = rate_from_time(tau); return *this; }
  SystemParams& set_tau_jitter(double tau) { jitter_rate = rate_from_time(tau); return *this; }

  bool operator==(const SystemParams&) const = default;
};

/// Rates and detunings that every model shares. Detunings are taken in the
/// frame rotating at the drive frequency omega_L.
struct DerivedRates {
  double kappa = 0.0;         // kappa1 + kappa2
  double gamma_perp = 0.0;    // 1/tau + 1/tau' + gamma_par/2
  double big_gamma = 0.0;     // 1/tau_jit + kappa
  double cooperativity = 0.0; // g^2 N / (kappa gamma_perp)
  double delta_c = 0.0;       // omega_c - omega_L
  double delta_a = 0.0;       // omega_a - omega_L
  double delta_ac = 0.0;      // delta_a - delta_c, independent of omega_L
  complex v{};                // g^2 N / [(kappa + i delta_c)(gamma_perp + i delta_a)]
};

namespace detail {
inline void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ParamError(field, what);
}
inline bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }
}  // namespace detail

/// Returns `params` unchanged or throws ParamError naming the first violated
/// invariant.
inline const SystemParams& validate(const SystemParams& params) {
  using detail::finite_non_negative;
  using detail::require;
  require(params.n_atoms >= 0, "n_atoms", "must be non-negative");
  require(std::isfinite(params.g), "g", "must be finite");
  require(finite_non_negative(params.kappa1), "kappa1", "must be finite and >= 0");
  require(finite_non_negative(params.kappa2), "kappa2", "must be finite and >= 0");
  require(params.kappa1 + params.kappa2 > 0.0, "kappa1+kappa2",
          "cavity must couple to at least one mirror");
  require(std::isfinite(params.omega_c), "omega_c", "must be finite");
  require(std::isfinite(params.omega_a), "omega_a", "must be finite");
  require(std::isfinite(params.gamma_par), "gamma_par", "must be finite");
  require(params.gamma_par > 0.0, "gamma_par",
          "singular parameter: population decay must be strictly positive");
  require(finite_non_negative(params.indiv_rate), "tau_indiv", "dephasing time must lie in (0, inf]");
  require(finite_non_negative(params.common_rate), "tau_common", "dephasing time must lie in (0, inf]");
  require(finite_non_negative(params.jitter_rate), "tau_jitter", "jitter time must lie in (0, inf]");
  require(std::isfinite(params.beta.real()) && std::isfinite(params.beta.imag()), "beta",
          "drive amplitude must be finite");
  return params;
}

inline double total_kappa(const SystemParams& p) { return p.kappa1 + p.kappa2; }

inline double gamma_perp(const SystemParams& p) {
  return p.indiv_rate + p.common_rate + 0.5 * p.gamma_par;
}

inline double cooperativity(const SystemParams& p) {
  return p.g * p.g * p.n_atoms / (total_kappa(p) * gamma_perp(p));
}

inline DerivedRates derive(const SystemParams& p, double omega_L) {
  DerivedRates d;
  d.kappa = total_kappa(p);
  d.gamma_perp = gamma_perp(p);
  d.big_gamma = p.jitter_rate + d.kappa;
  d.cooperativity = cooperativity(p);
  d.delta_c = p.omega_c - omega_L;
  d.delta_a = p.omega_a - omega_L;
  d.delta_ac = p.omega_a - p.omega_c;
  d.v = (p.g * p.g * p.n_atoms) /
        (complex(d.kappa, d.delta_c) * complex(d.gamma_perp, d.delta_a));
  return d;
}

/// Same collective coupling g^2 N spread over `n` atoms. For oscillator atoms
/// without individual dephasing only the symmetric atomic mode is ever
/// excited, so every cavity observable is unchanged.
inline SystemParams with_collective_coupling(SystemParams p, int n) {
  if (n <= 0) throw ParamError("n_atoms", "collective rescaling needs at least one atom");
  p.g = p.g * std::sqrt(static_cast<double>(p.n_atoms) / n);
  p.n_atoms = n;
  return p;
}

/// Drive amplitude that produces the mean field `target` in an empty cavity
/// at drive frequency omega_L (inverts <a> = sqrt(2 kappa1) beta/(Gamma + i delta_c)).
inline complex empty_cavity_drive_for_field(const SystemParams& p, double omega_L, complex target) {
  const double gam = p.jitter_rate + total_kappa(p);
  return target * complex(gam, p.omega_c - omega_L) / std::sqrt(2.0 * p.kappa1);
}

}  // namespace cavlab
