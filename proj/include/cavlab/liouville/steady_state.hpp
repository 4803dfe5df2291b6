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

#include <Eigen/Dense>
#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cavlab/liouville/operators.hpp"

namespace cavlab::liouville {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density matrix over a truncated composite space.
struct TruncatedState {
  Eigen::MatrixXcd rho;
  SpaceSpec space;

  complex trace() const { return rho.trace(); }
  double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  double purity() const { return (rho * rho).trace().real(); }
};

/// Solves generator(rho) = 0 with tr(rho) = 1.
struct SteadyStateOptions {
  /// Liouville-space dimensions above this use time marching instead of a
  /// sparse LU factorisation.
  Eigen::Index direct_solve_limit = 200000;
  double march_tolerance = 1e-11;  // |L rho| / |L| at which marching stops
  long max_march_steps = 20000000;
  bool force_time_marching = false;
};

namespace detail {

inline TruncatedState finish_state(const Eigen::VectorXcd& x, const Liouvillian& l) {
  TruncatedState s;
  s.space = l.space;
  s.rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), l.dim, l.dim);
  s.rho = 0.5 * (s.rho + s.rho.adjoint()).eval();
  s.rho /= s.rho.trace();
  return s;
}

inline double residual_norm(const Liouvillian& l, const Eigen::VectorXcd& x) {
  return (l.generator * x).norm();
}

inline TruncatedState direct_steady_state(const Liouvillian& l) {
  const Eigen::Index n = l.generator.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(l.generator.nonZeros()) + static_cast<std::size_t>(l.dim));
  for (Eigen::Index col = 0; col < l.generator.outerSize(); ++col)
    for (SpMat::InnerIterator it(l.generator, col); it; ++it)
      if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  // Row 0 (the rho_00 equation) becomes the trace condition.
  for (Eigen::Index i = 0; i < l.dim; ++i) t.emplace_back(0, static_cast<int>(i + i * l.dim), 1.0);
  SpMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();

  Eigen::UmfPackLU<SpMat> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw ConvergenceError("steady state: sparse LU factorisation failed");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs[0] = 1.0;
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw ConvergenceError("steady state: degenerate kernel, no unique stationary state");
  return finish_state(x, l);
}

inline double one_norm(const SpMat& m) {
  double best = 0.0;
  for (Eigen::Index col = 0; col < m.outerSize(); ++col) {
    double s = 0.0;
    for (SpMat::InnerIterator it(m, col); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

inline TruncatedState marched_steady_state(const Liouvillian& l, const SteadyStateOptions& opts) {
  const double scale = one_norm(l.generator);
  const double dt = 1.0 / scale;
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(l.generator.rows());
  x[0] = 1.0;  // vacuum
  for (long step = 0; step < opts.max_march_steps; ++step) {
    const Eigen::VectorXcd k1 = l.generator * x;
    if (step % 100 == 0 && k1.norm() <= opts.march_tolerance * scale) return finish_state(x, l);
    const Eigen::VectorXcd k2 = l.generator * (x + 0.5 * dt * k1);
    const Eigen::VectorXcd k3 = l.generator * (x + 0.5 * dt * k2);
    const Eigen::VectorXcd k4 = l.generator * (x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  throw ConvergenceError("steady state: time marching did not converge");
}

}  // namespace detail

inline TruncatedState steady_state(const Liouvillian& l, const SteadyStateOptions& opts = {}) {
  if (opts.force_time_marching || l.generator.rows() > opts.direct_solve_limit)
    return detail::marched_steady_state(l, opts);
  return detail::direct_steady_state(l);
}

/// Relative residual |L vec(rho)| / (|L|_1 |rho|).
inline double relative_residual(const Liouvillian& l, const TruncatedState& s) {
  const Eigen::Map<const Eigen::VectorXcd> x(s.rho.data(), s.rho.size());
  return detail::residual_norm(l, x) / (detail::one_norm(l.generator) * s.rho.norm());
}

/// tr(observable rho).
inline complex expectation(const TruncatedState& s, const SpMat& observable) {
  if (observable.rows() != s.rho.rows() || observable.cols() != s.rho.cols())
    throw std::invalid_argument("expectation: observable dimension " + std::to_string(observable.rows()) +
                                " does not match state dimension " + std::to_string(s.rho.rows()));
  complex acc{};
  for (Eigen::Index col = 0; col < observable.outerSize(); ++col)
    for (SpMat::InnerIterator it(observable, col); it; ++it) acc += it.value() * s.rho(it.col(), it.row());
  return acc;
}

/// Partial trace over atoms and probe, keeping the cavity.
inline TruncatedState reduce_cavity(const TruncatedState& s) {
  const Eigen::Index nc = s.space.cavity_dim();
  const std::int64_t rest = s.space.product_dimension() / nc;
  TruncatedState out;
  out.space = SpaceSpec{s.space.cavity_cutoff, s.space.atom_model, s.space.atom_cutoff, 0, false, 0};
  out.rho = Eigen::MatrixXcd::Zero(nc, nc);
  if (s.space.max_excitations <= 0) {
    for (Eigen::Index m = 0; m < nc; ++m)
      for (Eigen::Index n = 0; n < nc; ++n)
        for (Eigen::Index r = 0; r < rest; ++r) out.rho(m, n) += s.rho(m * rest + r, n * rest + r);
    return out;
  }
  // Group kept states by their non-cavity index.
  const auto keep = s.space.kept_states();
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> groups(static_cast<std::size_t>(rest));
  for (std::size_t i = 0; i < keep.size(); ++i)
    groups[static_cast<std::size_t>(keep[i] % rest)].emplace_back(keep[i] / rest, static_cast<Eigen::Index>(i));
  for (const auto& g : groups)
    for (const auto& [m, i] : g)
      for (const auto& [n, j] : g) out.rho(m, n) += s.rho(i, j);
  return out;
}

/// Truncated coherent-state amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!).
inline Eigen::VectorXcd coherent_amplitudes(complex alpha, int cutoff) {
  Eigen::VectorXcd v(cutoff + 1);
  v[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= cutoff; ++n) v[n] = v[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

/// <alpha| rho |alpha> for a single-mode state.
inline double coherent_fidelity(const TruncatedState& cavity, complex alpha) {
  const auto v = coherent_amplitudes(alpha, static_cast<int>(cavity.rho.rows()) - 1);
  return (v.adjoint() * cavity.rho * v)(0, 0).real();
}

/// Low-order moments read off a Liouvillian steady state, using atom 1 and
/// atom 2 as representatives.
struct StateMoments {
  complex ac{};       // <a_c>
  complex aj{};       // <a_1>
  double ncav = 0.0;  // <a_c^+ a_c>
  complex cross{};    // <a_c^+ a_1>
  double p_exc = 0.0; // mean <a_j^+ a_j> over atoms
  complex pair{};     // <a_2^+ a_1>
};

inline StateMoments state_moments(const TruncatedState& s, const SystemOperators& ops) {
  auto mean = [&](const SpMat& full) { return expectation(s, ops.restrict(full)); };
  StateMoments m;
  m.ac = mean(ops.a_c);
  m.ncav = mean(ops.cavity_number()).real();
  const int n = static_cast<int>(ops.atom_lower.size());
  if (n >= 1) {
    m.aj = mean(ops.atom_lower[0]);
    m.cross = mean(SpMat(ops.a_c.adjoint() * ops.atom_lower[0]));
    for (int j = 0; j < n; ++j) m.p_exc += mean(ops.atom_number(j)).real();
    m.p_exc /= n;
  }
  if (n >= 2) m.pair = mean(SpMat(ops.atom_lower[1].adjoint() * ops.atom_lower[0]));
  return m;
}

struct ConvergenceOptions {
  double tolerance = 1e-6;  // relative change allowed between successive cutoffs
  int cavity_step = 2;
  int atom_step = 1;
  int max_rounds = 8;
  SteadyStateOptions solver{};
};

struct ConvergedSolution {
  TruncatedState state;
  SystemOperators ops;
  StateMoments moments;
  double relative_change = 0.0;
  int rounds = 0;
};

namespace detail {
inline double rel_change(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}
inline double rel_change(complex a, complex b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}
inline double moment_change(const StateMoments& a, const StateMoments& b) {
  return std::max({rel_change(a.ac, b.ac), rel_change(a.ncav, b.ncav), rel_change(a.p_exc, b.p_exc),
                   rel_change(a.aj, b.aj), rel_change(a.cross, b.cross)});
}
}  // namespace detail

/// Raises the cutoffs (cavity by cavity_step, oscillator atoms by atom_step,
/// or the excitation cap by cavity_step when one is set) until the reported
/// moments change by less than the tolerance, and returns the solution at the
/// larger cutoff.
inline ConvergedSolution solve_converged(const SystemParams& p, double omega_L, SpaceSpec space,
                                         const ConvergenceOptions& opts = {}) {
  auto solve = [&](const SpaceSpec& sp) {
    ConvergedSolution sol{steady_state(build_liouvillian(p, omega_L, sp), opts.solver), make_operators(sp), {}, 0.0, 0};
    sol.moments = state_moments(sol.state, sol.ops);
    return sol;
  };
  ConvergedSolution prev = solve(space);
  for (int round = 1; round <= opts.max_rounds; ++round) {
    if (space.max_excitations > 0) {
      // Under a cap the per-mode cutoffs follow the cap.
      space.max_excitations += opts.cavity_step;
      space.cavity_cutoff = std::max(space.cavity_cutoff, space.max_excitations);
      if (space.atom_model == AtomModel::oscillator) space.atom_cutoff = std::max(space.atom_cutoff, space.max_excitations);
    } else {
      space.cavity_cutoff += opts.cavity_step;
      if (space.atom_model == AtomModel::oscillator && space.n_atoms > 0) space.atom_cutoff += opts.atom_step;
    }
    ConvergedSolution next = solve(space);
    next.relative_change = detail::moment_change(prev.moments, next.moments);
    next.rounds = round;
    if (next.relative_change < opts.tolerance) return next;
    prev = std::move(next);
  }
  throw ConvergenceError("cutoff convergence not reached after " + std::to_string(opts.max_rounds) +
                         " rounds (last relative change " + std::to_string(prev.relative_change) + ")");
}

}  // namespace cavlab::liouville
