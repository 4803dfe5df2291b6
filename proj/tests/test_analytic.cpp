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

SystemParams empty() {
  SystemParams p;
  p.n_atoms = 0;
  return p;
}

TEST(EmptyCavity, ResonantImpedanceMatchedField) {
  const auto s = analytic::steady_state(empty(), 0.0);
  EXPECT_NEAR(std::abs(s.mean_field - complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(s.photon_number, 1.0, 1e-15);
}

TEST(EmptyCavity, JitterHalvesFieldAndPhotonNumber) {
  auto p = empty();
  p.jitter_rate = 1.0;
  const auto s = analytic::steady_state(p, 0.0);
  EXPECT_NEAR(std::abs(s.mean_field - complex(0.5)), 0.0, 1e-15);
  EXPECT_NEAR(s.photon_number, 0.5, 1e-15);
  EXPECT_NEAR(s.coherence_ratio, 2.0, 1e-15);
}

TEST(EmptyCavity, UndrivenIsVacuum) {
  auto p = empty();
  p.beta = 0.0;
  const auto s = analytic::steady_state(p, 0.7);
  EXPECT_EQ(s.mean_field, complex(0.0));
  EXPECT_EQ(s.photon_number, 0.0);
}

TEST(FieldCoefficients, MatchedEmptyCavityTransmitsEverything) {
  const auto c = analytic::field_coefficients(empty(), 0.0);
  EXPECT_NEAR(std::abs(c.r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c.t - complex(1.0)), 0.0, 1e-15);
}

TEST(FieldCoefficients, LoadedCavityOnResonance) {
  const auto c = analytic::field_coefficients(figure(), 0.0);
  EXPECT_NEAR(std::abs(c.t - complex(1.0 / 21.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c.r - complex(-20.0 / 21.0)), 0.0, 1e-15);
}

TEST(FieldCoefficients, StrongLoadBlocksTransmission) {
  auto p = figure();
  p.g = 1e4;
  const auto c = analytic::field_coefficients(p, 0.0);
  EXPECT_LT(std::abs(c.t), 1e-7);
  EXPECT_NEAR(std::abs(c.r - complex(-1.0)), 0.0, 1e-7);
}

TEST(FieldCoefficients, AgreeWithMomentSolve) {
  auto p = figure();
  p.indiv_rate = 0.7;
  p.omega_a = 0.4;
  for (double w : {-5.0, -1.0, 0.0, 2.5}) {
    const auto c = analytic::field_coefficients(p, w);
    const auto m = moments::steady_state(p, w);
    EXPECT_NEAR(std::abs(c.t - std::sqrt(2.0 * p.kappa2) * m.s1 / p.beta), 0.0, 1e-12);
  }
}

TEST(CavityMoments, NoDephasingIsCoherent) {
  const auto s = analytic::cavity_moments(figure(), 1.3);
  EXPECT_EQ(s.coherence_ratio, 1.0);
  EXPECT_DOUBLE_EQ(s.photon_number, std::norm(s.mean_field));
}

TEST(CavityMoments, SingleAtomChannelsAreInterchangeable) {
  auto a = figure();
  a.n_atoms = 1;
  auto b = a;
  a.indiv_rate = 0.8;
  b.common_rate = 0.8;
  for (double w : {0.0, 1.0, -2.0}) {
    const auto sa = analytic::cavity_moments(a, w);
    const auto sb = analytic::cavity_moments(b, w);
    EXPECT_NEAR(sa.photon_number, sb.photon_number, 1e-15 * sa.photon_number);
    EXPECT_NEAR(sa.p_exc, sb.p_exc, 1e-15 * sa.p_exc);
  }
}

TEST(CavityMoments, IndividualDephasingRaisesPhotonNumber) {
  auto p = figure();
  p.indiv_rate = 3.0;
  EXPECT_GT(analytic::cavity_moments(p, 0.0).coherence_ratio, 1.0);
}

TEST(CavityMoments, JitterWithAtomsIsRejected) {
  auto p = figure();
  p.jitter_rate = 0.1;
  EXPECT_THROW(analytic::cavity_moments(p, 0.0), ParamError);
  EXPECT_THROW(analytic::lorentzian_height(p), ParamError);
}

TEST(CavityMoments, CramerSolutionAgrees) {
  auto p = figure();
  p.indiv_rate = 0.5;
  p.common_rate = 0.25;
  p.omega_a = 0.3;
  for (double w : {-4.0, 0.0, 1.0}) {
    const auto s = analytic::cavity_moments(p, w);
    const auto c = analytic::solve_population_system(p, w);
    EXPECT_NEAR(c.p_exc, s.p_exc, 1e-12 * s.p_exc);
    EXPECT_NEAR(c.photon_number, s.photon_number, 1e-12 * s.photon_number);
  }
}

TEST(PopulationSystem, DeterminantIsConsistent) {
  auto p = figure();
  p.indiv_rate = 1.0;
  p.omega_a = 1.0;
  const auto m = analytic::population_system(p, 0.2);
  EXPECT_NEAR(m.determinant, m.a * m.d - m.b * m.c, 1e-12 * std::abs(m.determinant));
  EXPECT_NEAR(m.determinant, analytic::determinant(p), 1e-12 * std::abs(m.determinant));
}

TEST(PopulationSystem, ResonantAtomsDropDetuningTerm) {
  auto p = figure();
  const auto m = analytic::population_system(p, 0.0);
  const double s = total_kappa(p) + gamma_perp(p);
  EXPECT_NEAR(m.a, p.gamma_par * s * s + 2.0 * p.g * p.g * s * p.n_atoms, 1e-12);
}

TEST(Intensities, CoherentCaseReducesToFieldModuli) {
  const auto c = analytic::intensity_coefficients(figure(), 0.8);
  EXPECT_NEAR(c.R, std::norm(c.r), 1e-15);
  EXPECT_NEAR(c.T, std::norm(c.t), 1e-15);
}

TEST(Intensities, CommonDephasingExceedsFieldTransmission) {
  auto p = figure();
  p.common_rate = 3.0;
  const auto c = analytic::intensity_coefficients(p, 0.0);
  EXPECT_GT(c.T, std::norm(c.t));
}

TEST(Intensities, FluxBalanceHolds) {
  for (double ind : {0.0, 0.5, 3.0})
    for (double com : {0.0, 0.2}) {
      auto p = figure();
      p.indiv_rate = ind;
      p.common_rate = com;
      p.omega_a = 0.5;
      for (double w : {-6.0, -1.0, 0.0, 4.0}) EXPECT_NEAR(analytic::flux_balance_residual(p, w), 0.0, 1e-13);
    }
}

TEST(DephasingFraction, ZeroWithoutDephasing) { EXPECT_EQ(analytic::dephasing_fraction(figure()), 0.0); }

TEST(DephasingFraction, IndividualChannelLimit) {
  auto p = figure();
  p.indiv_rate = 1.0;
  EXPECT_DOUBLE_EQ(analytic::dephasing_fraction(p), 1.0);
}

TEST(DephasingFraction, CommonChannelLimit) {
  auto p = figure();
  p.common_rate = 0.5;
  EXPECT_DOUBLE_EQ(analytic::dephasing_fraction(p), 2.5);
}

TEST(DephasingFraction, SingleAtomAddsRates) {
  auto p = figure();
  p.n_atoms = 1;
  p.indiv_rate = 0.3;
  p.common_rate = 0.4;
  EXPECT_DOUBLE_EQ(analytic::dephasing_fraction(p), 0.7);
}

TEST(LorentzianHeight, ZeroWithoutDephasing) { EXPECT_EQ(analytic::lorentzian_height(figure()).h, 0.0); }

TEST(LorentzianHeight, BoundedByCooperativity) {
  for (double g : {0.5, 2.0, 8.0})
    for (double r : {1e-3, 0.3, 3.0, 100.0}) {
      auto p = figure();
      p.g = g;
      p.indiv_rate = r;
      p.common_rate = 0.5 * r;
      const auto h = analytic::lorentzian_height(p);
      EXPECT_LE(h.h, h.bound_always);
    }
}

TEST(LorentzianHeight, ApproachesCooperativityForSlowDecay) {
  auto p = figure();
  p.gamma_par = 1e-4;
  p.indiv_rate = 1.0;
  const auto h = analytic::lorentzian_height(p);
  EXPECT_NEAR(h.h / h.bound_always, 1.0, 1e-2);
}

TEST(LorentzianHeight, MatchesPhotonRatioAtResonance) {
  auto p = figure();
  p.common_rate = 3.0;
  const auto h = analytic::lorentzian_height(p).h;
  EXPECT_NEAR(analytic::cavity_moments(p, 0.0).coherence_ratio - 1.0, h, 1e-13 * h);
  EXPECT_NEAR(h, 5.0 / 3.0, 1e-13);
}

TEST(EmissionSpectrum, EmptyCavityWithoutJitterIsCoherent) {
  const auto grid = default_spectrum_grid(empty());
  const auto s = analytic::emission_spectrum(empty(), 0.0, grid);
  for (double v : s.incoherent_density) EXPECT_EQ(v, 0.0);
  EXPECT_NEAR(s.coherent_power, 1.0, 1e-15);
}

TEST(EmissionSpectrum, IntegralEqualsPhotonNumber) {
  std::vector<SystemParams> cases;
  auto e = empty();
  e.jitter_rate = 0.5;
  cases.push_back(e);
  auto a = figure();
  a.common_rate = 3.0;
  cases.push_back(a);
  auto b = figure();
  b.indiv_rate = 1.0;
  b.omega_a = 1.0;
  cases.push_back(b);
  for (const auto& p : cases) {
    const auto grid = default_spectrum_grid(p);
    const auto s = analytic::emission_spectrum(p, 0.5, grid);
    const double n = analytic::steady_state(p, 0.5).photon_number;
    EXPECT_NEAR(trapezoid(s.grid, s.incoherent_density) + s.coherent_power, n, 1e-3 * n);
  }
}

TEST(EmissionSpectrum, ShapeIndependentOfDriveFrequency) {
  auto p = figure();
  p.common_rate = 3.0;
  const auto grid = linspace(-12.0, 12.0, 97);
  const auto s0 = analytic::emission_spectrum(p, 0.0, grid);
  const auto s8 = analytic::emission_spectrum(p, 8.0, grid);
  const double scale = s8.incoherent_density[48] / s0.incoherent_density[48];
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(s8.incoherent_density[i], scale * s0.incoherent_density[i], 1e-12 * s8.incoherent_density[48]);
}

TEST(EmissionSpectrum, RejectsNonMonotoneGrid) {
  const std::vector<double> grid{0.0, 1.0, 0.5};
  EXPECT_THROW(analytic::emission_spectrum(figure(), 0.0, grid), std::invalid_argument);
}

}  // namespace
