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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavlab/model.hpp"

namespace cavlab {

/// Cavity-field spectral density split into the coherent line at the drive
/// frequency (kept as a scalar weight, never rasterised) and the incoherent
/// density sampled on `grid`.
struct SpectrumResult {
  double coherent_power = 0.0;
  std::vector<double> grid;
  std::vector<double> incoherent_density;
  std::string method;
  std::vector<std::string> warnings;
};

inline bool is_monotone(std::span<const double> grid) {
  return std::adjacent_find(grid.begin(), grid.end(),
                            [](double a, double b) { return !(a < b); }) == grid.end();
}

inline void require_monotone(std::span<const double> grid) {
  if (grid.size() < 2 || !is_monotone(grid))
    throw std::invalid_argument("spectrum grid must be strictly increasing with at least two points");
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace needs at least two points");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("logspace bounds must be positive");
  auto exps = linspace(std::log10(lo), std::log10(hi), n);
  for (auto& e : exps) e = std::pow(10.0, e);
  return exps;
}

/// Trapezoid rule on a (possibly non-uniform) monotone grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

/// Unit-area Lorentzian with half width `width` centred on `center`.
inline double lorentzian(double omega, double center, double width) {
  const double d = omega - center;
  return width / (std::numbers::pi * (width * width + d * d));
}

/// Broadest linewidth present in the configuration.
inline double widest_rate(const SystemParams& p) {
  double w = p.jitter_rate + total_kappa(p);
  if (p.n_atoms > 0) w = std::max(w, gamma_perp(p));
  return w;
}

/// Default observation grid: a uniform core spanning
/// [min(wc, wa) - 10 w, max(wc, wa) + 10 w] with `core_points` samples, where
/// w is the widest linewidth, plus geometrically widening wings reaching
/// 1e4 w beyond the core. The wings carry the slowly decaying Lorentzian tails
/// of the empty-cavity spectrum.
inline std::vector<double> default_spectrum_grid(const SystemParams& p, std::size_t core_points = 2001,
                                                 std::size_t wing_points = 400) {
  const double w = widest_rate(p);
  const double lo = std::min(p.omega_c, p.omega_a) - 10.0 * w;
  const double hi = std::max(p.omega_c, p.omega_a) + 10.0 * w;
  auto core = linspace(lo, hi, std::max<std::size_t>(core_points, 3));
  const double h = core[1] - core[0];
  std::vector<double> out;
  if (wing_points > 0) {
    // Offsets from h up to 1e4 w, geometric.
    const double ratio = std::pow(1e4 * w / h, 1.0 / static_cast<double>(wing_points - 1));
    std::vector<double> offsets(wing_points);
    double off = h;
    for (auto& o : offsets) { o = off; off *= ratio; }
    for (auto it = offsets.rbegin(); it != offsets.rend(); ++it) out.push_back(lo - *it);
    out.insert(out.end(), core.begin(), core.end());
    for (double o : offsets) out.push_back(hi + o);
  } else {
    out = std::move(core);
  }
  return out;
}

}  // namespace cavlab
