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

#include <random>

#include "cavlab/analytic.hpp"
#include "cavlab/moments.hpp"

namespace {

using namespace cavlab;

SystemParams figure() {
  SystemParams p;
  p.g = 2.0;
  p.n_atoms = 5;
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

TEST(MomentSteadyState, DerivativeVanishes) {
  auto p = figure();
  p.indiv_rate = 0.4;
  p.common_rate = 1.1;
  p.omega_a = 0.5;
  const auto s = moments::steady_state(p, 1.2);
  const auto d = moments::derivative(s, p, 1.2);
  EXPECT_LT(d.max_abs(), 1e-10);
}

TEST(MomentSteadyState, UndrivenVacuumIsStationary) {
  auto p = figure();
  p.beta = 0.0;
  EXPECT_EQ(moments::derivative(moments::MomentState{}, p, 0.3).max_abs(), 0.0);
}

TEST(MomentSteadyState, AgreesWithClosedFormOnRandomDraws) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lg(-2.0, 2.0);
  const int atoms[] = {1, 2, 3, 5, 20};
  for (int k = 0; k < 40; ++k) {
    SystemParams p;
    p.n_atoms = atoms[k % 5];
    p.g = std::pow(10.0, lg(rng));
    p.kappa1 = std::pow(10.0, lg(rng));
    p.kappa2 = std::pow(10.0, lg(rng));
    p.gamma_par = std::pow(10.0, lg(rng));
    p.indiv_rate = std::pow(10.0, lg(rng));
    p.common_rate = std::pow(10.0, lg(rng));
    p.omega_a = lg(rng);
    for (double w : {-3.0, 0.0, 0.7}) {
      const auto a = analytic::cavity_moments(p, w);
      const auto m = moments::steady_state(p, w);
      EXPECT_LT(rel(a.photon_number, m.s3), 1e-9);
      EXPECT_LT(rel(a.p_exc, m.s5), 1e-9);
      EXPECT_LT(std::abs(a.mean_field - m.s1) / std::abs(m.s1), 1e-9);
    }
  }
}

TEST(MomentSteadyState, EnergyBalance) {
  auto p = figure();
  p.indiv_rate = 2.0;
  p.common_rate = 0.1;
  for (double w : {-5.0, 0.0, 3.0}) {
    const auto s = moments::steady_state(p, w);
    const double input = 2.0 * std::sqrt(2.0 * p.kappa1) * std::real(std::conj(p.beta) * s.s1);
    EXPECT_LT(std::abs(moments::energy_balance_residual(s, p)) / input, 1e-10);
  }
}

TEST(MomentSteadyState, AtomPairSumMatchesClosedForm) {
  auto p = figure();
  p.indiv_rate = 0.6;
  p.common_rate = 0.2;
  const auto s = moments::steady_state(p, 0.4);
  const double n = p.n_atoms;
  const double expected = n * s.s5 * (p.indiv_rate + n * p.gamma_par / 2) / (p.indiv_rate + p.gamma_par / 2);
  EXPECT_LT(rel(moments::atom_pair_sum(s, p.n_atoms), expected), 1e-10);
}

TEST(MomentSteadyState, FactorizesWithoutDephasing) {
  auto p = figure();
  p.omega_a = 0.3;
  const auto s = moments::steady_state(p, 1.0);
  const double scale = std::norm(s.s1);
  EXPECT_LT(std::abs(s.s3 - std::norm(s.s1)) / scale, 1e-12);
  EXPECT_LT(std::abs(s.s5 - std::norm(s.s2)) / scale, 1e-12);
  EXPECT_LT(std::abs(s.s4 - std::conj(s.s1) * s.s2) / scale, 1e-12);
  EXPECT_LT(std::abs(s.s6 - std::norm(s.s2)) / scale, 1e-12);
}

TEST(MomentSteadyState, SingleAtomChannelSymmetry) {
  auto a = figure();
  a.n_atoms = 1;
  auto b = a;
  a.indiv_rate = 1.3;
  b.common_rate = 1.3;
  const auto sa = moments::steady_state(a, 0.5);
  const auto sb = moments::steady_state(b, 0.5);
  EXPECT_LT((sa - sb).max_abs(), 1e-14);
}

TEST(PerAtom, ReducedSystemMatchesFullEquations) {
  for (int n : {1, 2, 3}) {
    auto p = figure();
    p.n_atoms = n;
    p.indiv_rate = 0.7;
    p.common_rate = 0.3;
    p.omega_a = -0.4;
    const auto red = moments::steady_state(p, 0.9);
    const auto full = moments::per_atom_steady_state(p, 0.9);
    EXPECT_LT(std::abs(red.s1 - full.ac), 1e-12);
    EXPECT_LT(std::abs(red.s3 - full.ncav), 1e-12);
    EXPECT_LT(std::abs(red.s2 - full.aj[0]), 1e-12);
    EXPECT_LT(std::abs(red.s4 - full.cross[n - 1]), 1e-12);
    EXPECT_LT(std::abs(red.s5 - full.pair(0, 0).real()), 1e-12);
    if (n >= 2) EXPECT_LT(std::abs(red.s6 - full.pair(0, 1).real()), 1e-12);
  }
}

TEST(Integrate, VacuumStartReachesSteadyState) {
  auto p = figure();
  p.indiv_rate = 0.5;
  const double slow = std::min({total_kappa(p), p.gamma_par, gamma_perp(p)});
  const auto traj = moments::integrate(p, 0.0, 20.0 / slow + 20.0, 1e-3, {}, {1e-6, 1000});
  const auto ss = moments::steady_state(p, 0.0);
  EXPECT_LT((traj.back().state - ss).max_abs() / ss.max_abs(), 1e-6);
}

TEST(Integrate, SteadyStartStaysPut) {
  auto p = figure();
  p.common_rate = 1.0;
  const auto ss = moments::steady_state(p, 0.5);
  const auto traj = moments::integrate(p, 0.5, 2.0, 1e-2, ss);
  for (const auto& s : traj) EXPECT_LT((s.state - ss).max_abs(), 1e-12);
}

TEST(Integrate, HalvingStepChangesLittle) {
  auto p = figure();
  p.indiv_rate = 0.5;
  const auto a = moments::integrate(p, 0.0, 3.0, 2e-3, {}, {1e-6, 100000});
  const auto b = moments::integrate(p, 0.0, 3.0, 1e-3, {}, {1e-6, 100000});
  EXPECT_LT((a.back().state - b.back().state).max_abs(), 1e-8);
}

TEST(Integrate, OversizedStepIsRejected) {
  auto p = figure();
  p.g = 50.0;
  EXPECT_THROW(moments::integrate(p, 0.0, 1.0, 0.5, {}), moments::StepSizeError);
  EXPECT_THROW(moments::integrate(p, 0.0, 1.0, 0.0, {}), std::invalid_argument);
}

TEST(Regression, CoherentWithoutDephasing) {
  auto p = figure();
  const auto grid = linspace(-10.0, 10.0, 81);
  const auto s = moments::regression_spectrum(p, 0.0, grid, moments::default_regression_window(p),
                                              moments::default_regression_step(p, 0.0));
  for (double v : s.incoherent_density) EXPECT_LT(std::abs(v), 1e-8 * s.coherent_power);
}

TEST(Regression, EmptyCavityJitterLorentzian) {
  SystemParams p;
  p.n_atoms = 0;
  p.jitter_rate = 0.5;
  const std::vector<double> grid{-0.5, 0.0, 0.5};
  const auto s = moments::regression_spectrum(p, 0.0, grid, moments::default_regression_window(p),
                                              moments::default_regression_step(p, 0.0));
  const auto a = analytic::emission_spectrum(p, 0.0, grid);
  EXPECT_LT(rel(s.incoherent_density[1], a.incoherent_density[1]), 1e-3);
  EXPECT_TRUE(s.warnings.empty());
}

TEST(Regression, MatchesClosedFormWithAtoms) {
  auto p = figure();
  p.indiv_rate = 3.0;
  p.beta = 0.05;
  const auto grid = linspace(-12.0, 12.0, 97);
  const auto s = moments::regression_spectrum(p, 0.0, grid, moments::default_regression_window(p),
                                              moments::default_regression_step(p, 0.0));
  const auto a = analytic::emission_spectrum(p, 0.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(rel(s.incoherent_density[i], a.incoherent_density[i]), 1e-3);
}

TEST(Regression, IntegralIdentityOnWideGrid) {
  auto p = figure();
  p.common_rate = 3.0;
  const auto grid = default_spectrum_grid(p);
  const auto s = moments::regression_spectrum(p, 8.0, grid, moments::default_regression_window(p),
                                              moments::default_regression_step(p, 8.0));
  const double n = moments::steady_state(p, 8.0).s3;
  EXPECT_LT(rel(trapezoid(s.grid, s.incoherent_density) + s.coherent_power, n), 1e-3);
}

TEST(Regression, ShortWindowWarns) {
  auto p = figure();
  p.common_rate = 3.0;
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  const auto s = moments::regression_spectrum(p, 0.0, grid, 0.5, 1e-3);
  EXPECT_FALSE(s.warnings.empty());
  EXPECT_THROW(moments::regression_spectrum(p, 0.0, grid, 0.5, 0.0), std::invalid_argument);
}

TEST(Intensities, RequireNonZeroDrive) {
  auto p = figure();
  p.beta = 0.0;
  EXPECT_THROW(moments::intensities(moments::steady_state(p, 0.0), p), std::invalid_argument);
}

}  // namespace
