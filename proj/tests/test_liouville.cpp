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

#include <gtest/gtest.h>

#include <cstdlib>

#include "cavlab/analytic.hpp"
#include "cavlab/liouville/probe.hpp"
#include "cavlab/liouville/steady_state.hpp"
#include "cavlab/liouville/stochastic.hpp"
#include "cavlab/liouville/wigner.hpp"
#include "cavlab/moments.hpp"

namespace {

using namespace cavlab;
using namespace cavlab::liouville;

SystemParams empty(double beta = 0.3) {
  SystemParams p;
  p.n_atoms = 0;
  p.beta = beta;
  return p;
}

SpaceSpec cavity_only(int cutoff) { return {cutoff, AtomModel::oscillator, 1, 0, false, 0}; }

SpaceSpec capped(int n_atoms, int cap, AtomModel m = AtomModel::oscillator) {
  return {cap, m, m == AtomModel::oscillator ? cap : 1, n_atoms, false, cap};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

TEST(Space, DimensionsAndCap) {
  const SpaceSpec full{3, AtomModel::oscillator, 2, 2, false, 0};
  EXPECT_EQ(full.dimension(), 4 * 3 * 3);
  const SpaceSpec two_level{3, AtomModel::two_level, 5, 2, true, 0};
  EXPECT_EQ(two_level.dimension(), 4 * 2 * 2 * 2);
  // three modes, at most two quanta: C(5, 3)
  EXPECT_EQ(capped(2, 2).dimension(), 10);
}

TEST(Space, BudgetIsEnforced) {
  const SpaceSpec big{40, AtomModel::oscillator, 5, 3, false, 0};
  EXPECT_THROW(big.check_budget(), BudgetError);
  EXPECT_NO_THROW(big.check_budget(100000));
  SpaceSpec bad = cavity_only(0);
  EXPECT_THROW(bad.check_budget(), std::invalid_argument);
}

TEST(Space, BudgetEnvironmentOverride) {
  ::setenv("CAVLAB_BUDGET", "12", 1);
  EXPECT_EQ(dimension_budget(), 12);
  EXPECT_THROW(make_operators(cavity_only(12)), BudgetError);
  ::unsetenv("CAVLAB_BUDGET");
  EXPECT_EQ(dimension_budget(), kDefaultDimensionBudget);
}

TEST(Operators, HamiltonianIsHermitianUnderCap) {
  SystemParams p;
  p.g = 1.3;
  p.n_atoms = 2;
  p.beta = complex(0.2, 0.1);
  const auto ops = make_operators(capped(2, 3));
  const SpMat h = hamiltonian(p, 0.4, ops);
  EXPECT_LT(Eigen::MatrixXcd(h - SpMat(h.adjoint())).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(h.rows(), capped(2, 3).dimension());
}

TEST(Liouvillian, PreservesTrace) {
  SystemParams p;
  p.g = 1.0;
  p.n_atoms = 2;
  p.indiv_rate = 0.5;
  p.common_rate = 0.2;
  p.beta = 0.3;
  const auto l = build_liouvillian(p, 0.0, SpaceSpec{2, AtomModel::two_level, 1, 2, false, 0});
  // sum over diagonal rows of every column vanishes
  Eigen::VectorXcd trace_row = Eigen::VectorXcd::Zero(l.generator.rows());
  for (Eigen::Index i = 0; i < l.dim; ++i) trace_row[i + i * l.dim] = 1.0;
  const Eigen::VectorXcd col_sums = SpMat(l.generator.transpose()) * trace_row;
  EXPECT_LT(col_sums.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Liouvillian, AtomCountMismatchIsRejected) {
  SystemParams p;
  p.n_atoms = 2;
  EXPECT_THROW(build_liouvillian(p, 0.0, cavity_only(3)), std::invalid_argument);
}

TEST(SteadyState, UndrivenEmptyCavityIsVacuum) {
  const auto s = steady_state(build_liouvillian(empty(0.0), 0.0, cavity_only(6)));
  EXPECT_NEAR(s.rho(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(s.purity(), 1.0, 1e-13);
}

TEST(SteadyState, ValidDensityMatrix) {
  SystemParams p;
  p.g = 1.0;
  p.n_atoms = 1;
  p.indiv_rate = 1.0;
  p.beta = 0.8;
  const auto l = build_liouvillian(p, 0.5, SpaceSpec{8, AtomModel::two_level, 1, 1, false, 0});
  const auto s = steady_state(l);
  EXPECT_NEAR(std::abs(s.trace() - complex(1.0)), 0.0, 1e-13);
  EXPECT_LT(s.hermiticity_error(), 1e-13);
  EXPECT_GT(s.min_eigenvalue(), -1e-12);
  EXPECT_LT(relative_residual(l, s), 1e-12);
}

TEST(SteadyState, TimeMarchingAgreesWithDirectSolve) {
  auto p = empty(0.5);
  p.jitter_rate = 0.3;
  const auto l = build_liouvillian(p, 0.2, cavity_only(8));
  SteadyStateOptions o;
  o.force_time_marching = true;
  const auto a = steady_state(l);
  const auto b = steady_state(l, o);
  EXPECT_LT((a.rho - b.rho).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Expectation, BasicObservables) {
  const auto s = steady_state(build_liouvillian(empty(0.0), 0.0, cavity_only(4)));
  const auto ops = make_operators(cavity_only(4));
  EXPECT_NEAR(std::abs(expectation(s, ops.identity_op) - complex(1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(expectation(s, ops.cavity_number())), 0.0, 1e-14);
  EXPECT_THROW(expectation(s, identity(3)), std::invalid_argument);
}

TEST(Expectation, DrivenEmptyCavityField) {
  const auto p = empty(0.4);
  const auto sol = solve_converged(p, 0.3, cavity_only(8));
  const auto expected = analytic::steady_state(p, 0.3).mean_field;
  EXPECT_LT(std::abs(sol.moments.ac - expected), 1e-8);
}

TEST(EmptyCavity, CoherentWithoutJitter) {
  const auto p = empty(0.5);
  const auto sol = solve_converged(p, 0.0, cavity_only(8));
  const auto cav = reduce_cavity(sol.state);
  EXPECT_GT(coherent_fidelity(cav, analytic::steady_state(p, 0.0).mean_field), 1.0 - 1e-6);
}

TEST(EmptyCavity, JitterDoublesPhotonRatio) {
  auto p = empty();
  p.jitter_rate = total_kappa(p);
  p.beta = empty_cavity_drive_for_field(p, 0.0, 1.0);
  const auto sol = solve_converged(p, 0.0, cavity_only(10));
  EXPECT_NEAR(sol.moments.ncav / std::norm(sol.moments.ac), 2.0, 1e-3);
}

TEST(Atoms, OscillatorsMatchMomentsAtWeakDrive) {
  SystemParams p;
  p.g = 2.0;
  p.n_atoms = 2;
  p.indiv_rate = 0.8;
  p.common_rate = 0.3;
  p.beta = 0.02;
  const auto sol = solve_converged(p, 0.5, capped(2, 2));
  const auto m = moments::steady_state(p, 0.5);
  EXPECT_LT(rel(sol.moments.ncav, m.s3), 1e-6);
  EXPECT_LT(rel(sol.moments.p_exc, m.s5), 1e-6);
  EXPECT_LT(std::abs(sol.moments.ac - m.s1) / std::abs(m.s1), 1e-6);
}

TEST(Atoms, ReducedCavityUnderCapMatchesFullBasis) {
  SystemParams p;
  p.g = 1.5;
  p.n_atoms = 1;
  p.indiv_rate = 0.5;
  p.beta = 0.4;
  const SpaceSpec full{4, AtomModel::oscillator, 4, 1, false, 0};
  const SpaceSpec cap{4, AtomModel::oscillator, 4, 1, false, 4};
  const auto a = reduce_cavity(steady_state(build_liouvillian(p, 0.0, full)));
  const auto b = reduce_cavity(steady_state(build_liouvillian(p, 0.0, cap)));
  EXPECT_NEAR(a.rho.trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(b.rho.trace().real(), 1.0, 1e-12);
  EXPECT_LT((a.rho - b.rho).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Atoms, StrongDriveSaturatesTwoLevelAtoms) {
  SystemParams p;
  p.g = 2.0;
  p.n_atoms = 1;
  p.beta = 1.5;
  const auto sol = solve_converged(p, 0.0, SpaceSpec{10, AtomModel::two_level, 1, 1, false, 0});
  EXPECT_LE(sol.moments.p_exc, 0.5 + 1e-9);
  const double t_linear = analytic::intensity_coefficients(p, 0.0).T;
  EXPECT_GT(rel(2.0 * p.kappa2 * sol.moments.ncav / std::norm(p.beta), t_linear), 0.05);
}

TEST(Convergence, ReportsFailure) {
  auto p = empty(3.0);
  ConvergenceOptions o;
  o.max_rounds = 1;
  o.tolerance = 1e-14;
  EXPECT_THROW(solve_converged(p, 0.0, cavity_only(2), o), ConvergenceError);
}

TEST(Wigner, VacuumPeak) {
  const auto s = steady_state(build_liouvillian(empty(0.0), 0.0, cavity_only(4)));
  EXPECT_NEAR(wigner_at(s, 0.0), 2.0 / std::numbers::pi, 1e-14);
  const auto w = wigner(s, PhaseSpaceGrid::square(-4.0, 4.0, 81));
  EXPECT_LT(w.normalization_residual, 1e-4);
  EXPECT_NEAR(w.w(40, 40), 2.0 / std::numbers::pi, 1e-14);
  EXPECT_NEAR(w.w(30, 40), w.w(40, 30), 1e-14);
}

TEST(Wigner, CoherentStatePeaksAtAmplitude) {
  TruncatedState s;
  s.space = cavity_only(30);
  const Eigen::VectorXcd v = coherent_amplitudes(2.0, 30);
  s.rho = v * v.adjoint();
  EXPECT_NEAR(wigner_at(s, 2.0), 2.0 / std::numbers::pi, 1e-9);
  EXPECT_NEAR(wigner_at(s, complex(2.0, 0.5)), wigner_at(s, complex(2.0, -0.5)), 1e-12);
  const auto w = wigner(s, PhaseSpaceGrid::square(-3.0, 7.0, 201));
  const auto m = grid_moments(w);
  EXPECT_NEAR(std::abs(m.mean_field - complex(2.0)), 0.0, 1e-6);
  EXPECT_NEAR(m.photon_number, 4.0, 1e-4);
}

TEST(Wigner, JitterSmearKeepsPhotonRatio) {
  SystemParams p;
  p.n_atoms = 0;
  p.jitter_rate = 1.0;
  p.beta = empty_cavity_drive_for_field(p, 0.0, 2.0);
  const auto sol = solve_converged(p, 0.0, cavity_only(30));
  const auto w = wigner(reduce_cavity(sol.state), PhaseSpaceGrid::square(-8.0, 8.0, 201));
  const auto m = grid_moments(w);
  EXPECT_NEAR(m.photon_number / std::norm(m.mean_field), 2.0, 2e-2);
  EXPECT_GT(wigner_at(reduce_cavity(sol.state), complex(0.0, 2.0)), 1e-3);  // the crescent
}

TEST(Wigner, BadGridsAreRejected) {
  TruncatedState s;
  s.space = cavity_only(30);
  const Eigen::VectorXcd v = coherent_amplitudes(3.0, 30);
  s.rho = v * v.adjoint();
  EXPECT_THROW(wigner(s, PhaseSpaceGrid::square(-1.0, 1.0, 41)), GridError);
  EXPECT_THROW(wigner(s, PhaseSpaceGrid::square(1.0, -1.0, 41)), GridError);
  TruncatedState joint;
  joint.space = SpaceSpec{2, AtomModel::two_level, 1, 1, false, 0};
  joint.rho = Eigen::MatrixXcd::Identity(6, 6) / 6.0;
  EXPECT_THROW(wigner(joint, PhaseSpaceGrid::square(-3.0, 3.0, 41)), std::invalid_argument);
}

TEST(Probe, EmptyCavityJitterLorentzian) {
  auto p = empty(0.3);
  p.jitter_rate = 0.5;
  const std::vector<double> grid{-0.5, 0.0, 0.5};
  ProbeOptions o;
  o.kappa_p = (total_kappa(p) + p.jitter_rate) / 100.0;
  const auto pr = probe_spectrum(p, 0.0, grid, cavity_only(8), o);
  const auto an = analytic::emission_spectrum(p, 0.0, grid);
  EXPECT_LT(rel(pr.incoherent_density[1], an.incoherent_density[1]), 0.02);
  EXPECT_NEAR(pr.coherent_power, std::norm(analytic::steady_state(p, 0.0).mean_field), 1e-8);
}

TEST(Probe, AtomsMatchClosedFormAwayFromCarrier) {
  SystemParams p;
  p.g = 2.0;
  p.n_atoms = 5;
  p.common_rate = 3.0;
  p.beta = 0.05;
  const auto one = with_collective_coupling(p, 1);
  const std::vector<double> grid{-6.0, -4.0, -2.0, 1.0, 3.0, 5.0};
  ProbeOptions o;
  o.kappa_p = 1e-2 / std::numbers::pi;
  const auto pr = probe_spectrum(one, 0.0, grid, capped(1, 4), o);
  const auto an = analytic::emission_spectrum(p, 0.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(rel(pr.incoherent_density[i], an.incoherent_density[i]), 0.02);
}

TEST(Probe, CoherentDriveGivesSingleLine) {
  const auto p = empty(0.3);
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  ProbeOptions o;
  o.kappa_p = 0.01;
  const auto pr = probe_spectrum(p, 0.0, grid, cavity_only(6), o);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_LT(std::abs(pr.incoherent_density[i]), 1e-5 * pr.coherent_power * lorentzian(grid[i], 0.0, o.kappa_p));
  EXPECT_GT(pr.coherent_power, 0.0);
}

TEST(Probe, InvalidRequests) {
  const auto p = empty(0.3);
  const std::vector<double> grid{0.0, 1.0};
  ProbeOptions o;
  o.epsilon = 0.0;
  EXPECT_THROW(probe_spectrum(p, 0.0, grid, cavity_only(6), o), std::invalid_argument);
  EXPECT_THROW(probe_spectrum(p, 0.0, grid, SpaceSpec{6, AtomModel::two_level, 1, 1, false, 0}), std::invalid_argument);
  EXPECT_THROW(probe_spectrum(p, 0.0, grid, cavity_only(400)), BudgetError);
}

TEST(Stochastic, NoNoiseGivesZeroDistance) {
  const auto prob = cavity_number_problem(10, 1.0, 0.0, 0.3, 0.5);
  StochasticOptions o;
  o.n_traj = 8;
  o.dt = 1e-2;
  EXPECT_LT(stochastic_dephasing_check(prob, o).trace_distance, 1e-10);
}

TEST(Stochastic, DistanceWithinStatisticalBound) {
  const auto prob = cavity_number_problem(12, 1.0, 2.0, 0.0, 0.5);
  StochasticOptions o;
  o.n_traj = 2000;
  o.dt = 2e-3;
  o.seed = 11;
  const auto r = stochastic_dephasing_check(prob, o);
  EXPECT_LT(r.trace_distance, 3.0 / std::sqrt(2000.0));
  EXPECT_NEAR(r.averaged.trace().real(), 1.0, 1e-10);
}

TEST(Stochastic, IndependentOfThreadCount) {
  const auto prob = cavity_number_problem(8, 0.7, 1.0);
  StochasticOptions o;
  o.n_traj = 300;
  o.dt = 1e-2;
  o.threads = 1;
  const auto a = stochastic_dephasing_check(prob, o);
  o.threads = 4;
  const auto b = stochastic_dephasing_check(prob, o);
  EXPECT_EQ((a.averaged - b.averaged).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Stochastic, LindbladReferencePreservesTrace) {
  const auto prob = cavity_number_problem(8, 1.0, 2.0);
  const Eigen::VectorXcd psi = prob.initial.normalized();
  const Eigen::MatrixXcd rho0 = psi * psi.adjoint();
  const auto rho = lindblad_evolve(prob.hamiltonian, std::sqrt(2.0) * prob.observable, rho0, 1.0);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
  // pure dephasing in the number basis keeps the populations
  EXPECT_LT((rho.diagonal() - rho0.diagonal()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(std::abs(rho(0, 1)), std::abs(rho0(0, 1)) * std::exp(-1.0), 1e-10);
}

TEST(Stochastic, InvalidInputs) {
  auto prob = cavity_number_problem(4, 0.5, 1.0);
  StochasticOptions o;
  o.dt = 0.0;
  EXPECT_THROW(stochastic_dephasing_check(prob, o), std::invalid_argument);
  o = {};
  prob.observable(0, 1) = 1.0;
  EXPECT_THROW(stochastic_dephasing_check(prob, o), std::invalid_argument);
}

}  // namespace
