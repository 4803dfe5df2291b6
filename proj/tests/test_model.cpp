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

#include "cavlab/model.hpp"

namespace {

using cavlab::ParamError;
using cavlab::SystemParams;

SystemParams figure() {
  SystemParams p;
  p.g = 2.0;
  p.n_atoms = 5;
  return p;
}

TEST(Params, DefaultFigureSetIsAccepted) { EXPECT_NO_THROW(cavlab::validate(figure())); }

TEST(Params, ZeroPopulationDecayIsRejected) {
  auto p = figure();
  p.gamma_par = 0.0;
  try {
    cavlab::validate(p);
    FAIL() << "expected ParamError";
  } catch (const ParamError& e) {
    EXPECT_EQ(e.field(), "gamma_par");
  }
}

TEST(Params, NoMirrorCouplingIsRejected) {
  auto p = figure();
  p.kappa1 = p.kappa2 = 0.0;
  EXPECT_THROW(cavlab::validate(p), ParamError);
}

TEST(Params, NegativeAtomCountAndRatesAreRejected) {
  auto p = figure();
  p.n_atoms = -1;
  EXPECT_THROW(cavlab::validate(p), ParamError);
  p = figure();
  p.indiv_rate = -1.0;
  EXPECT_THROW(cavlab::validate(p), ParamError);
  p = figure();
  p.beta = {std::nan(""), 0.0};
  EXPECT_THROW(cavlab::validate(p), ParamError);
}

TEST(Params, InfiniteTimesMapToZeroRates) {
  SystemParams p;
  p.set_tau_indiv(cavlab::kInfinity).set_tau_common(0.5).set_tau_jitter(cavlab::kInfinity);
  EXPECT_EQ(p.indiv_rate, 0.0);
  EXPECT_DOUBLE_EQ(p.common_rate, 2.0);
  EXPECT_TRUE(std::isinf(p.tau_jitter()));
  EXPECT_DOUBLE_EQ(p.tau_common(), 0.5);
}

TEST(DerivedRates, GammaPerpWithoutDephasing) {
  auto p = figure();
  EXPECT_DOUBLE_EQ(cavlab::gamma_perp(p), 1.0);
  p.indiv_rate = 3.0;
  EXPECT_DOUBLE_EQ(cavlab::gamma_perp(p), 4.0);
}

TEST(DerivedRates, Cooperativity) {
  const auto p = figure();
  EXPECT_DOUBLE_EQ(cavlab::cooperativity(p), 20.0);
  EXPECT_DOUBLE_EQ(cavlab::derive(p, 0.3).cooperativity, 20.0);
}

TEST(DerivedRates, EmptyCavityHasNoAtomicLoad) {
  auto p = figure();
  p.n_atoms = 0;
  for (double w : {-3.0, 0.0, 1.5}) EXPECT_EQ(cavlab::derive(p, w).v, cavlab::complex(0.0));
}

TEST(DerivedRates, DetuningsInDriveFrame) {
  auto p = figure();
  p.omega_c = 1.0;
  p.omega_a = -2.0;
  const auto d = cavlab::derive(p, 0.5);
  EXPECT_DOUBLE_EQ(d.delta_c, 0.5);
  EXPECT_DOUBLE_EQ(d.delta_a, -2.5);
  EXPECT_DOUBLE_EQ(d.delta_ac, -3.0);
  EXPECT_DOUBLE_EQ(d.kappa, 1.0);
}

TEST(DerivedRates, OnResonanceLoadEqualsCooperativity) {
  EXPECT_NEAR(std::abs(cavlab::derive(figure(), 0.0).v - 20.0), 0.0, 1e-14);
}

TEST(CollectiveCoupling, KeepsCollectiveCoupling) {
  const auto q = cavlab::with_collective_coupling(figure(), 3);
  EXPECT_EQ(q.n_atoms, 3);
  EXPECT_NEAR(q.g * q.g * q.n_atoms, 20.0, 1e-12);
  EXPECT_THROW(cavlab::with_collective_coupling(figure(), 0), ParamError);
}

TEST(EmptyCavityDrive, InvertsTheMeanField) {
  SystemParams p;
  p.jitter_rate = 1.0;
  const auto beta = cavlab::empty_cavity_drive_for_field(p, 0.0, 2.0);
  EXPECT_NEAR(std::abs(beta - cavlab::complex(4.0, 0.0)), 0.0, 1e-14);
}

}  // namespace
