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

// Exact equations of motion for the first and second moments of the cavity
// and the (oscillator-approximated) atoms. Identical atoms starting from a
// symmetric state stay exchange symmetric, so six scalars suffice:
//
//   s1 = <a_c>          s2 = <a_j>            s3 = <a_c^+ a_c>
//   s4 = <a_c^+ a_j>    s5 = <a_j^+ a_j>      s6 = <a_k^+ a_j>, k != j
//
// Individual dephasing damps dipoles and the k != j atom pairs; dephasing
// common to all atoms commutes with every atom-atom bilinear and therefore
// only reaches s2 and s4 (through gamma_perp). Cavity jitter damps s1 and s4.

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavlab/model.hpp"
#include "cavlab/spectrum.hpp"

namespace cavlab::moments {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MomentState {
  complex s1{};
  complex s2{};
  double s3 = 0.0;
  complex s4{};
  double s5 = 0.0;
  double s6 = 0.0;

  static constexpr int kRealDim = 9;

  Eigen::Matrix<double, kRealDim, 1> to_real() const {
    Eigen::Matrix<double, kRealDim, 1> x;
    x << s1.real(), s1.imag(), s2.real(), s2.imag(), s3, s4.real(), s4.imag(), s5, s6;
    return x;
  }
  static MomentState from_real(const Eigen::Matrix<double, kRealDim, 1>& x) {
    return {{x[0], x[1]}, {x[2], x[3]}, x[4], {x[5], x[6]}, x[7], x[8]};
  }

  MomentState& operator+=(const MomentState& o) {
    s1 += o.s1; s2 += o.s2; s3 += o.s3; s4 += o.s4; s5 += o.s5; s6 += o.s6;
    return *this;
  }
  friend MomentState operator+(MomentState a, const MomentState& b) { return a += b; }
  friend MomentState operator*(double k, MomentState a) {
    a.s1 *= k; a.s2 *= k; a.s3 *= k; a.s4 *= k; a.s5 *= k; a.s6 *= k;
    return a;
  }
  friend MomentState operator-(const MomentState& a, const MomentState& b) { return a + (-1.0) * b; }

  /// Largest absolute component.
  double max_abs() const {
    return std::max({std::abs(s1), std::abs(s2), std::abs(s3), std::abs(s4), std::abs(s5), std::abs(s6)});
  }
};

namespace detail {

/// Which of the nine real components carry physical content for N atoms.
inline std::array<bool, MomentState::kRealDim> active_components(int n_atoms) {
  if (n_atoms == 0) return {true, true, false, false, true, false, false, false, false};
  if (n_atoms == 1) return {true, true, true, true, true, true, true, true, false};
  return {true, true, true, true, true, true, true, true, true};
}

/// Solves F(x) = 0 for an affine map F on R^n by probing it with unit vectors.
template <int N, class F>
Eigen::Matrix<double, N, 1> solve_affine_fixed_point(F&& f, int dim = N) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  Vec zero = Vec::Zero(dim);
  const Vec offset = f(zero);
  Mat a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    Vec e = Vec::Zero(dim);
    e[i] = 1.0;
    a.col(i) = f(e) - offset;
  }
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw SingularSystemError("moment equations have no unique steady state");
  return lu.solve(-offset);
}

}  // namespace detail

/// Time derivative of the symmetry-reduced moments.
inline MomentState derivative(const MomentState& s, const SystemParams& p, double omega_L) {
  const auto d = derive(p, omega_L);
  const double n = p.n_atoms;
  const double g = p.g;
  const complex drive = std::sqrt(2.0 * p.kappa1) * p.beta;
  const complex cav_damp(d.kappa + p.jitter_rate, d.delta_c);
  const complex flip = s.s4 - std::conj(s.s4);  // 2i Im s4

  MomentState ds;
  ds.s1 = -cav_damp * s.s1 - kI * g * n * s.s2 + drive;
  ds.s3 = -2.0 * d.kappa * s.s3 + 2.0 * std::real(std::conj(p.beta) * s.s1) * std::sqrt(2.0 * p.kappa1) -
          std::real(kI * g * n * flip);
  if (p.n_atoms >= 1) {
    ds.s2 = -complex(d.gamma_perp, d.delta_a) * s.s2 - kI * g * s.s1;
    ds.s4 = -complex(d.kappa + p.jitter_rate + d.gamma_perp, d.delta_ac) * s.s4 +
            std::conj(drive) * s.s2 - kI * g * s.s3 + kI * g * (s.s5 + (n - 1.0) * s.s6);
    ds.s5 = std::real(kI * g * flip) - p.gamma_par * s.s5;
  }
  if (p.n_atoms >= 2) ds.s6 = std::real(kI * g * flip) - (2.0 * p.indiv_rate + p.gamma_par) * s.s6;
  return ds;
}

/// Exact steady state of the moment equations.
inline MomentState steady_state(const SystemParams& p, double omega_L) {
  validate(p);
  const auto active = detail::active_components(p.n_atoms);
  using Vec = Eigen::Matrix<double, MomentState::kRealDim, 1>;
  auto residual = [&](const Vec& x) {
    Vec r = derivative(MomentState::from_real(x), p, omega_L).to_real();
    for (int i = 0; i < MomentState::kRealDim; ++i)
      if (!active[i]) r[i] = x[i];  // pin absent components to zero
    return r;
  };
  return MomentState::from_real(detail::solve_affine_fixed_point<MomentState::kRealDim>(residual));
}

/// Energy balance residual 2 kappa s3 + N gamma_par s5 - sqrt(2 kappa1)(beta s1* + beta* s1).
inline double energy_balance_residual(const MomentState& s, const SystemParams& p) {
  const double input = 2.0 * std::sqrt(2.0 * p.kappa1) * std::real(std::conj(p.beta) * s.s1);
  return 2.0 * total_kappa(p) * s.s3 + p.n_atoms * p.gamma_par * s.s5 - input;
}

/// Sum over all atom pairs (including k = j) of <a_k^+ a_j>.
inline double atom_pair_sum(const MomentState& s, int n_atoms) {
  const double n = n_atoms;
  return n * s.s5 + n * (n - 1.0) * s.s6;
}

/// Intensity reflection and transmission read off the moments through the
/// input-output relations, per unit incident flux |beta|^2.
struct Intensities {
  double R = 0.0;
  double T = 0.0;
  double abs_t_sq = 0.0;  // coherent part of T
};

inline Intensities intensities(const MomentState& s, const SystemParams& p) {
  const double flux = std::norm(p.beta);
  if (flux == 0.0) throw std::invalid_argument("intensities: beta must be non-zero");
  const double in = 2.0 * std::sqrt(2.0 * p.kappa1) * std::real(std::conj(p.beta) * s.s1);
  return {1.0 + (2.0 * p.kappa1 * s.s3 - in) / flux, 2.0 * p.kappa2 * s.s3 / flux,
          2.0 * p.kappa2 * std::norm(s.s1) / flux};
}

// ---------------------------------------------------------------------------
// Per-atom (non-reduced) equations, kept for small N as a cross-check of the
// symmetry reduction.

struct PerAtomState {
  complex ac{};
  std::vector<complex> aj;     // <a_j>
  double ncav = 0.0;           // <a_c^+ a_c>
  std::vector<complex> cross;  // <a_c^+ a_j>
  std::vector<complex> atoms;  // <a_k^+ a_j>, row-major (k, j)

  explicit PerAtomState(int n = 0) : aj(n), cross(n), atoms(static_cast<std::size_t>(n) * n) {}
  int n_atoms() const { return static_cast<int>(aj.size()); }
  complex pair(int k, int j) const { return atoms[static_cast<std::size_t>(k) * aj.size() + j]; }

  Eigen::VectorXd to_real() const {
    const int n = n_atoms();
    Eigen::VectorXd x(3 + 4 * n + 2 * n * n);
    int i = 0;
    x[i++] = ac.real(); x[i++] = ac.imag();
    x[i++] = ncav;
    for (int j = 0; j < n; ++j) { x[i++] = aj[j].real(); x[i++] = aj[j].imag(); }
    for (int j = 0; j < n; ++j) { x[i++] = cross[j].real(); x[i++] = cross[j].imag(); }
    for (const auto& c : atoms) { x[i++] = c.real(); x[i++] = c.imag(); }
    return x;
  }
  static PerAtomState from_real(const Eigen::VectorXd& x, int n) {
    PerAtomState s(n);
    int i = 0;
    s.ac = {x[i], x[i + 1]}; i += 2;
    s.ncav = x[i++];
    for (int j = 0; j < n; ++j, i += 2) s.aj[j] = {x[i], x[i + 1]};
    for (int j = 0; j < n; ++j, i += 2) s.cross[j] = {x[i], x[i + 1]};
    for (auto& c : s.atoms) { c = {x[i], x[i + 1]}; i += 2; }
    return s;
  }
};

inline PerAtomState per_atom_derivative(const PerAtomState& s, const SystemParams& p, double omega_L) {
  const auto d = derive(p, omega_L);
  const int n = s.n_atoms();
  const double g = p.g;
  const complex drive = std::sqrt(2.0 * p.kappa1) * p.beta;
  PerAtomState ds(n);

  complex sum_aj{}, sum_cross_flip{};
  for (int j = 0; j < n; ++j) {
    sum_aj += s.aj[j];
    sum_cross_flip += s.cross[j] - std::conj(s.cross[j]);
  }
  ds.ac = -complex(d.kappa + p.jitter_rate, d.delta_c) * s.ac - kI * g * sum_aj + drive;
  ds.ncav = -2.0 * d.kappa * s.ncav + 2.0 * std::real(std::conj(drive) * s.ac) -
            std::real(kI * g * sum_cross_flip);
  for (int j = 0; j < n; ++j) {
    ds.aj[j] = -complex(d.gamma_perp, d.delta_a) * s.aj[j] - kI * g * s.ac;
    complex column{};
    for (int k = 0; k < n; ++k) column += s.pair(k, j);
    ds.cross[j] = -complex(d.kappa + p.jitter_rate + d.gamma_perp, d.delta_ac) * s.cross[j] +
                  std::conj(drive) * s.aj[j] - kI * g * s.ncav + kI * g * column;
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const double damp = p.gamma_par + (k == j ? 0.0 : 2.0 * p.indiv_rate);
      // <a_k^+ a_c> = conj(<a_c^+ a_k>)
      ds.atoms[static_cast<std::size_t>(k) * n + j] =
          kI * g * (s.cross[j] - std::conj(s.cross[k])) - damp * s.pair(k, j);
    }
  }
  return ds;
}

inline PerAtomState per_atom_steady_state(const SystemParams& p, double omega_L) {
  validate(p);
  const int n = p.n_atoms;
  const int dim = 3 + 4 * n + 2 * n * n;
  auto residual = [&](const Eigen::VectorXd& x) {
    return per_atom_derivative(PerAtomState::from_real(x, n), p, omega_L).to_real();
  };
  return PerAtomState::from_real(detail::solve_affine_fixed_point<Eigen::Dynamic>(residual, dim), n);
}

// ---------------------------------------------------------------------------
// Time integration.

struct TrajectorySample {
  double t = 0.0;
  MomentState state;
};

namespace detail {
inline MomentState rk4_step(const MomentState& s, double dt, const SystemParams& p, double omega_L) {
  const auto k1 = derivative(s, p, omega_L);
  const auto k2 = derivative(s + (0.5 * dt) * k1, p, omega_L);
  const auto k3 = derivative(s + (0.5 * dt) * k2, p, omega_L);
  const auto k4 = derivative(s + dt * k3, p, omega_L);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}
}  // namespace detail

struct IntegrateOptions {
  double tolerance = 1e-6;  // bound on the local error estimate per step
  int record_every = 1;     // keep every n-th step (the final step is always kept)
};

/// Classical fixed-step RK4. Each step is compared against two half steps;
/// if the difference (scaled by 1/15) exceeds tolerance * (1 + |state|) the
/// step size is rejected with StepSizeError.
inline std::vector<TrajectorySample> integrate(const SystemParams& p, double omega_L, double t_end, double dt,
                                               const MomentState& initial, IntegrateOptions opts = {}) {
  validate(p);
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (!(t_end >= dt)) throw std::invalid_argument("integrate: t_end must be at least dt");
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  std::vector<TrajectorySample> out;
  out.push_back({0.0, initial});
  MomentState s = initial;
  for (long i = 1; i <= steps; ++i) {
    const auto full = detail::rk4_step(s, dt, p, omega_L);
    const auto half = detail::rk4_step(detail::rk4_step(s, 0.5 * dt, p, omega_L), 0.5 * dt, p, omega_L);
    const double err = (full - half).max_abs() / 15.0;
    if (err > opts.tolerance * (1.0 + full.max_abs()))
      throw StepSizeError("integrate: local error estimate " + std::to_string(err) + " at t = " +
                          std::to_string(i * dt) + " exceeds tolerance; reduce dt");
    s = full;
    if (i % opts.record_every == 0 || i == steps) out.push_back({static_cast<double>(i) * dt, s});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-time correlations by quantum regression.

struct CorrelationTrace {
  std::vector<double> lags;
  std::vector<complex> g1;  // <a_c^+(t) a_c(t + lag)> in steady state
  double plateau = 0.0;     // |<a_c>|^2, the lag -> infinity limit
};

/// Integrates the regression pair (<a_c^+(0) a_c(lag)>, <a_c^+(0) a_j(lag)>)
/// from (s3, s4) with RK4. The pair obeys the first-moment equations with the
/// drive term multiplied by <a_c^+> = s1*.
inline CorrelationTrace correlation_trace(const SystemParams& p, double omega_L, double t_max, double dt) {
  validate(p);
  if (!(dt > 0.0) || !(t_max > dt)) throw std::invalid_argument("correlation_trace: need 0 < dt < t_max");
  const auto ss = steady_state(p, omega_L);
  const auto d = derive(p, omega_L);
  const complex a_cc = -complex(d.kappa + p.jitter_rate, d.delta_c);
  const complex a_cj = -kI * p.g * static_cast<double>(p.n_atoms);
  const complex a_jc = -kI * p.g;
  const complex a_jj = -complex(d.gamma_perp, d.delta_a);
  const complex source = std::sqrt(2.0 * p.kappa1) * p.beta * std::conj(ss.s1);
  const bool atoms = p.n_atoms > 0;

  using Pair = std::array<complex, 2>;
  auto f = [&](const Pair& z) -> Pair {
    if (!atoms) return {a_cc * z[0] + source, 0.0};
    return {a_cc * z[0] + a_cj * z[1] + source, a_jc * z[0] + a_jj * z[1]};
  };
  auto axpy = [](const Pair& z, double h, const Pair& k) -> Pair { return {z[0] + h * k[0], z[1] + h * k[1]}; };

  long steps = static_cast<long>(std::ceil(t_max / dt));
  CorrelationTrace tr;
  tr.plateau = std::norm(ss.s1);
  tr.lags.resize(steps + 1);
  tr.g1.resize(steps + 1);
  Pair z{ss.s3, atoms ? ss.s4 : complex{}};
  for (long i = 0; i <= steps; ++i) {
    tr.lags[i] = static_cast<double>(i) * dt;
    tr.g1[i] = z[0];
    const auto k1 = f(z);
    const auto k2 = f(axpy(z, 0.5 * dt, k1));
    const auto k3 = f(axpy(z, 0.5 * dt, k2));
    const auto k4 = f(axpy(z, dt, k3));
    for (int c = 0; c < 2; ++c) z[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
  return tr;
}

struct RegressionOptions {
  double decay_tolerance = 1e-6;  // warn if |g1(t_max) - plateau| exceeds this fraction of its start
};

namespace detail {

/// Filon weights for one segment of length h with f linear on it:
/// int_0^h f(s) e^{i nu s} ds = h [(e1 - e2) f(0) + e2 f(h)], theta = nu h.
inline std::pair<complex, complex> filon_weights(double theta) {
  const complex it(0.0, theta);
  complex e1, e2;
  if (std::abs(theta) < 0.5) {
    complex term = 1.0;  // (i theta)^k / k!
    for (int k = 0; k < 16; ++k) {
      e1 += term / static_cast<double>(k + 1);
      e2 += term / static_cast<double>(k + 2);
      term *= it / static_cast<double>(k + 1);
    }
  } else {
    const complex ex = std::exp(it);
    e1 = (ex - 1.0) / it;
    e2 = ex / it - (ex - 1.0) / (it * it);
  }
  return {e1 - e2, e2};
}

}  // namespace detail

/// Spectral density from the one-sided transform
///   S_inc(omega) = (1/pi) Re int_0^inf [g1(lag) - |s1|^2] exp(i (omega - omega_L) lag) dlag.
/// The RK4 samples are interpolated linearly and the oscillating factor is
/// integrated exactly on each step, so detunings far beyond 1/dt stay accurate.
inline SpectrumResult regression_spectrum(const SystemParams& p, double omega_L, std::span<const double> grid,
                                          double t_max, double dt, RegressionOptions opts = {}) {
  require_monotone(grid);
  const auto tr = correlation_trace(p, omega_L, t_max, dt);
  const std::size_t m = tr.lags.size();
  std::vector<complex> fluct(m);
  for (std::size_t i = 0; i < m; ++i) fluct[i] = tr.g1[i] - tr.plateau;

  SpectrumResult out;
  out.method = "regression";
  out.coherent_power = tr.plateau;
  out.grid.assign(grid.begin(), grid.end());
  out.incoherent_density.resize(grid.size());
  const double start = std::abs(fluct.front());
  const double end = std::abs(fluct.back());
  if (end > opts.decay_tolerance * start && start > 0.0)
    out.warnings.push_back("correlation has not decayed to its plateau by t_max = " + std::to_string(t_max) +
                           " (residual fraction " + std::to_string(end / start) + "); increase t_max");

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double detuning = grid[k] - omega_L;
    const auto [w0, w1] = detail::filon_weights(detuning * dt);
    const complex rot = std::polar(1.0, detuning * dt);
    complex phase = 1.0;
    complex acc{};
    for (std::size_t i = 0; i + 1 < m; ++i) {
      acc += phase * (w0 * fluct[i] + w1 * fluct[i + 1]);
      phase *= rot;
      if ((i & 255u) == 255u) phase = std::polar(1.0, detuning * dt * static_cast<double>(i + 1));
    }
    out.incoherent_density[k] = dt * acc.real() / std::numbers::pi;
  }
  return out;
}

/// Default lag window for the regression spectrum: long enough for the
/// slowest mode of the correlation pair to decay by e^-40.
inline double default_regression_window(const SystemParams& p) {
  double slow = total_kappa(p) + p.jitter_rate;
  if (p.n_atoms > 0) slow = std::min(slow, gamma_perp(p));
  return 40.0 / slow;
}

/// Default lag step: 1/100 of the period of the fastest rate or frequency in
/// the correlation pair, measured in the frame of the drive.
inline double default_regression_step(const SystemParams& p, double omega_L) {
  const auto d = derive(p, omega_L);
  double fast = std::max(total_kappa(p) + p.jitter_rate, std::abs(d.delta_c));
  if (p.n_atoms > 0)
    fast = std::max({fast, gamma_perp(p), std::abs(d.delta_a), p.g * std::sqrt(static_cast<double>(p.n_atoms))});
  return 0.01 / fast;
}

}  // namespace cavlab::moments
