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

// Averaging a rapidly fluctuating Hamiltonian sqrt(D) xi(t) O, with white
// noise xi, over realisations reproduces the Lindblad term with collapse
// operator sqrt(D) O. Each trajectory is a pure state propagated with a
// symmetric split step: half a step of the deterministic Hamiltonian, the
// noise kick exp(-i sqrt(D) dW O), half a step again. The kick is applied in
// the eigenbasis of O, where it is diagonal and exact.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "cavlab/detail/parallel.hpp"
#include "cavlab/liouville/steady_state.hpp"

namespace cavlab::liouville {

struct StochasticProblem {
  Eigen::MatrixXcd hamiltonian;  // deterministic part
  Eigen::MatrixXcd observable;   // O, Hermitian
  double diffusion_D = 0.0;
  Eigen::VectorXcd initial;      // pure initial state
};

struct StochasticOptions {
  double t_end = 1.0;
  double dt = 1e-3;
  std::size_t n_traj = 10000;
  std::uint64_t seed = 1;
  unsigned threads = cavlab::detail::worker_count();
};

struct DistanceReport {
  double trace_distance = 0.0;
  Eigen::MatrixXcd averaged;   // trajectory mean of |psi><psi|
  Eigen::MatrixXcd reference;  // Lindblad evolution at t_end
  std::size_t n_traj = 0;
  long steps = 0;
};

/// 0.5 * sum of |eigenvalues| of the Hermitian difference.
inline double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Eigen::MatrixXcd d = a - b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// exp(t L) rho0 for L(rho) = -i[H, rho] + D[c](rho), by the matrix
/// exponential of the dense Liouvillian.
inline Eigen::MatrixXcd lindblad_evolve(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& c, const Eigen::MatrixXcd& rho0,
                                        double t) {
  const Eigen::Index d = h.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd cdc = c.adjoint() * c;
  Eigen::MatrixXcd l = Eigen::kroneckerProduct(id, (-kI) * h).eval() + Eigen::kroneckerProduct(kI * h.transpose(), id).eval();
  l += Eigen::kroneckerProduct(c.conjugate(), c).eval();
  l -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
  l -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
  const Eigen::MatrixXcd prop = (t * l).exp();
  const Eigen::VectorXcd v = prop * Eigen::Map<const Eigen::VectorXcd>(rho0.data(), rho0.size());
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

namespace detail {
inline constexpr std::size_t kTrajectoryBlock = 64;
}

/// Trajectory average against the Lindblad evolution with c = sqrt(D) O.
/// Results depend only on the seed, never on the thread count: every
/// trajectory draws from its own generator and block sums are added in order.
inline DistanceReport stochastic_dephasing_check(const StochasticProblem& prob, const StochasticOptions& opts) {
  const Eigen::Index d = prob.hamiltonian.rows();
  if (prob.hamiltonian.cols() != d || prob.observable.rows() != d || prob.observable.cols() != d ||
      prob.initial.size() != d)
    throw std::invalid_argument("stochastic check: operator and state dimensions differ");
  if ((prob.observable - prob.observable.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("stochastic check: observable must be Hermitian");
  if (!(prob.diffusion_D >= 0.0)) throw std::invalid_argument("stochastic check: diffusion_D must be non-negative");
  if (!(opts.dt > 0.0) || !(opts.t_end > 0.0) || opts.n_traj == 0)
    throw std::invalid_argument("stochastic check: need dt > 0, t_end > 0 and n_traj > 0");

  const long steps = std::lround(opts.t_end / opts.dt);
  const double dt = opts.t_end / static_cast<double>(steps);

  // Work in the eigenbasis of O.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eo(0.5 * (prob.observable + prob.observable.adjoint()));
  const Eigen::MatrixXcd& v = eo.eigenvectors();
  const Eigen::VectorXd o = eo.eigenvalues();
  const Eigen::MatrixXcd h = v.adjoint() * prob.hamiltonian * v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eh(0.5 * (h + h.adjoint()));
  const Eigen::VectorXcd half_phase = (eh.eigenvalues().cast<complex>() * (-kI * 0.5 * dt)).array().exp();
  const Eigen::MatrixXcd half = eh.eigenvectors() * half_phase.asDiagonal() * eh.eigenvectors().adjoint();
  const Eigen::MatrixXcd full = half * half;
  const Eigen::VectorXcd psi0 = v.adjoint() * prob.initial.normalized();
  const double amp = std::sqrt(prob.diffusion_D);

  const std::size_t blocks = (opts.n_traj + detail::kTrajectoryBlock - 1) / detail::kTrajectoryBlock;
  std::vector<Eigen::MatrixXcd> partial(blocks, Eigen::MatrixXcd::Zero(d, d));
  cavlab::detail::parallel_for(
      blocks,
      [&](std::size_t b) {
        Eigen::VectorXcd psi(d), tmp(d);
        const std::size_t first = b * detail::kTrajectoryBlock;
        const std::size_t last = std::min(opts.n_traj, first + detail::kTrajectoryBlock);
        for (std::size_t k = first; k < last; ++k) {
          std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                            static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
          std::mt19937_64 rng(seq);
          std::normal_distribution<double> normal(0.0, std::sqrt(dt));
          psi.noalias() = half * psi0;
          for (long s = 0; s < steps; ++s) {
            const double kick = amp * normal(rng);
            for (Eigen::Index i = 0; i < d; ++i) psi[i] *= std::polar(1.0, -kick * o[i]);
            tmp.noalias() = (s + 1 < steps ? full : half) * psi;
            psi.swap(tmp);
          }
          partial[b].noalias() += psi * psi.adjoint();
        }
      },
      opts.threads);
  Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& m : partial) mean += m;
  mean /= static_cast<double>(opts.n_traj);

  DistanceReport rep;
  rep.averaged = v * mean * v.adjoint();
  const Eigen::MatrixXcd rho0 = prob.initial.normalized() * prob.initial.normalized().adjoint();
  rep.reference = lindblad_evolve(prob.hamiltonian, amp * prob.observable, rho0, opts.t_end);
  rep.trace_distance = trace_distance(rep.averaged, rep.reference);
  rep.n_traj = opts.n_traj;
  rep.steps = steps;
  return rep;
}

/// Cavity dephasing test case: O = a^+a on levels 0..cutoff, coherent initial
/// state, deterministic Hamiltonian detuning a^+a + i drive (a^+ - a).
inline StochasticProblem cavity_number_problem(int cutoff, complex alpha, double diffusion_D, double detuning = 0.0,
                                               double drive = 0.0) {
  const Eigen::MatrixXcd a(destroy(cutoff));
  StochasticProblem p;
  p.observable = a.adjoint() * a;
  p.hamiltonian = detuning * p.observable + kI * drive * (a.adjoint() - a);
  p.diffusion_D = diffusion_D;
  p.initial = coherent_amplitudes(alpha, cutoff);
  return p;
}

}  // namespace cavlab::liouville
