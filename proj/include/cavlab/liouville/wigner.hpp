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

// Wigner function of a single-mode state on the alpha plane,
// W(alpha) = (2/pi) tr[rho D(alpha) P D(-alpha)], normalised so that the
// integral over d^2 alpha = dRe(alpha) dIm(alpha) is one. The vacuum peak is
// 2/pi and a coherent state |alpha0> peaks at alpha = alpha0.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavlab/liouville/steady_state.hpp"
#include "cavlab/spectrum.hpp"

namespace cavlab::liouville {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PhaseSpaceGrid {
  double x_min = -5.0, x_max = 5.0;  // Re(alpha)
  double p_min = -5.0, p_max = 5.0;  // Im(alpha)
  int nx = 201, np = 201;

  static PhaseSpaceGrid square(double lo, double hi, int n) { return {lo, hi, lo, hi, n, n}; }
};

struct WignerGrid {
  PhaseSpaceGrid spec;
  std::vector<double> x;
  std::vector<double> p;
  Eigen::MatrixXd w;  // w(i, j) at (x[i], p[j])
  double normalization_residual = 0.0;  // |integral - 1|
};

/// Quadrature moments of a Wigner grid. photon_number is the symmetric-order
/// second moment minus 1/2.
struct GridMoments {
  double integral = 0.0;
  complex mean_field{};
  double photon_number = 0.0;
};

namespace detail {

inline std::vector<double> trapezoid_weights(double lo, double hi, int n) {
  std::vector<double> w(static_cast<std::size_t>(n), (hi - lo) / (n - 1));
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

/// Sum over the Laguerre expansion at one point, using the recurrence of the
/// displaced-parity matrix elements. `rho` must be Hermitian.
inline double wigner_point(const Eigen::MatrixXcd& rho, complex alpha, std::vector<complex>& wl) {
  const int m_dim = static_cast<int>(rho.rows());
  const complex a2 = 2.0 * alpha;
  wl[0] = std::exp(-2.0 * std::norm(alpha)) / std::numbers::pi;
  double w = std::real(rho(0, 0) * wl[0]);
  for (int n = 1; n < m_dim; ++n) {
    wl[n] = a2 * wl[n - 1] / std::sqrt(static_cast<double>(n));
    w += 2.0 * std::real(rho(0, n) * wl[n]);
  }
  for (int m = 1; m < m_dim; ++m) {
    const double sm = std::sqrt(static_cast<double>(m));
    complex temp = wl[m];
    wl[m] = (std::conj(a2) * temp - sm * wl[m - 1]) / sm;
    w += std::real(rho(m, m) * wl[m]);
    for (int n = m + 1; n < m_dim; ++n) {
      const complex next = (a2 * wl[n - 1] - sm * temp) / std::sqrt(static_cast<double>(n));
      temp = wl[n];
      wl[n] = next;
      w += 2.0 * std::real(rho(m, n) * wl[n]);
    }
  }
  return 2.0 * w;
}

}  // namespace detail

inline double wigner_at(const TruncatedState& cavity, complex alpha) {
  std::vector<complex> wl(static_cast<std::size_t>(cavity.rho.rows()));
  return detail::wigner_point(cavity.rho, alpha, wl);
}

/// Trapezoid-rule moments of the grid.
inline GridMoments grid_moments(const WignerGrid& g) {
  const auto wx = detail::trapezoid_weights(g.spec.x_min, g.spec.x_max, g.spec.nx);
  const auto wp = detail::trapezoid_weights(g.spec.p_min, g.spec.p_max, g.spec.np);
  GridMoments m;
  double second = 0.0;
  for (int i = 0; i < g.spec.nx; ++i)
    for (int j = 0; j < g.spec.np; ++j) {
      const double weight = wx[i] * wp[j] * g.w(i, j);
      m.integral += weight;
      m.mean_field += weight * complex(g.x[i], g.p[j]);
      second += weight * (g.x[i] * g.x[i] + g.p[j] * g.p[j]);
    }
  m.photon_number = second - 0.5;
  return m;
}

/// Samples W on the grid and checks the normalisation; a residual above
/// `tolerance` means the grid is too coarse or does not cover the state.
inline WignerGrid wigner(const TruncatedState& cavity, const PhaseSpaceGrid& spec, double tolerance = 1e-4) {
  if (cavity.space.n_atoms != 0 || cavity.space.probe_enabled)
    throw std::invalid_argument("wigner: expected a single-mode state (use reduce_cavity first)");
  if (spec.nx < 2 || spec.np < 2 || !(spec.x_max > spec.x_min) || !(spec.p_max > spec.p_min))
    throw GridError("wigner: grid needs max > min and at least two points per axis");
  WignerGrid g;
  g.spec = spec;
  g.x = linspace(spec.x_min, spec.x_max, static_cast<std::size_t>(spec.nx));
  g.p = linspace(spec.p_min, spec.p_max, static_cast<std::size_t>(spec.np));
  g.w.resize(spec.nx, spec.np);
  std::vector<complex> wl(static_cast<std::size_t>(cavity.rho.rows()));
  for (int i = 0; i < spec.nx; ++i)
    for (int j = 0; j < spec.np; ++j) g.w(i, j) = detail::wigner_point(cavity.rho, complex(g.x[i], g.p[j]), wl);
  g.normalization_residual = std::abs(grid_moments(g).integral - 1.0);
  if (g.normalization_residual > tolerance)
    throw GridError("wigner: normalisation residual " + std::to_string(g.normalization_residual) +
                    " exceeds " + std::to_string(tolerance) + "; widen or refine the grid");
  return g;
}

}  // namespace cavlab::liouville
