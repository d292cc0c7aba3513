// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The cfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "cfsim/optimizer.hpp"
#include "cfsim/rate.hpp"
#include "oracles.hpp"

namespace cfsim {
namespace {

using testing::DropFixture;
using testing::desk_config;
using testing::make_drop;

TEST(EffectiveGains, BlocksArePByP) {
  for (int p : {1, 2}) {
    ScenarioConfig c = desk_config(AccessMode::CellFree);
    c.mux_order = p;
    const DropFixture f = make_drop(c, 0);
    EXPECT_EQ(f.gains.streams, p);
    for (int k = 0; k < c.num_ms; ++k)
      for (int l = 0; l < c.num_ms; ++l)
        for (int m : f.assoc.servers[l]) {
          EXPECT_EQ(f.gains.block(k, l, m).rows(), p);
          EXPECT_EQ(f.gains.block(k, l, m).cols(), p);
        }
    EXPECT_LT((SmallMat(f.gains.noise) - f.noise_w * (c.n_ms / p) * SmallMat::Identity(p, p)).norm(),
              1e-25);
  }
}

TEST(EffectiveGains, SingleLinkDefinition) {
  ScenarioConfig c = desk_config(AccessMode::CellFree);
  c.num_aps = 1;
  c.num_ms = 1;
  c.uc_cluster_size = 1;
  const DropFixture f = make_drop(c, 0);
  const CMat expected = f.combiner.adjoint() * f.channels.at(0, 0).adjoint() * f.precoders.at(0, 0);
  EXPECT_LT((CMat(f.gains.block(0, 0, 0)) - expected).norm(), 1e-12 * expected.norm());
}

TEST(EffectiveGains, ZeroChannelGivesZeroBlocks) {
  DropFixture f = make_drop(desk_config(AccessMode::CellFree), 0);
  f.channels.at(1, 3).setZero();
  const GainTensor g = effective_gains(f.channels, f.combiner, f.precoders, f.assoc, f.noise_w);
  for (int l = 0; l < f.cfg.num_ms; ++l) EXPECT_EQ(g.block(1, l, 3).norm(), 0.0);
}

TEST(InterferenceCovariance, NoiseOnlyAtZeroPower) {
  const DropFixture f = make_drop(desk_config(), 0);
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(f.cfg.num_aps, f.cfg.num_ms);
  const SmallMat r = interference_covariance(f.gains, p, 0);
  EXPECT_EQ(r(0, 0), cd(f.noise_w * f.cfg.n_ms, 0.0));
}

TEST(InterferenceCovariance, SingleInterferer) {
  const DropFixture f = make_drop(desk_config(AccessMode::CellFree), 1);
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(f.cfg.num_aps, f.cfg.num_ms);
  p.eta(4, 2) = 0.03;
  const SmallMat r = interference_covariance(f.gains, p, 0);
  const SmallMat& b = f.gains.block(0, 2, 4);
  const SmallMat expected = SmallMat(f.gains.noise) + 0.03 * b * b.adjoint();
  EXPECT_LT((r - expected).norm(), 1e-12 * expected.norm());
}

TEST(InterferenceCovariance, HermitianAndBoundedBelowByNoise) {
  for (AccessMode mode : {AccessMode::UserCentric, AccessMode::CellFree}) {
    ScenarioConfig c = desk_config(mode);
    c.mux_order = 2;
    const DropFixture f = make_drop(c, 2);
    Rng rng = make_stream(1, 2, StreamTag::Geometry);
    for (int t = 0; t < 20; ++t) {
      const PowerAllocation p = testing::random_allocation(f.assoc, 1.0, rng, false);
      for (int k = 0; k < c.num_ms; ++k) {
        const SmallMat r = interference_covariance(f.gains, p, k);
        EXPECT_LE((r - r.adjoint()).norm(), 1e-12 * r.norm());
        Eigen::SelfAdjointEigenSolver<SmallMat> eig(r);
        const double floor = f.noise_w * c.n_ms / c.mux_order;
        EXPECT_GE(eig.eigenvalues().minCoeff(), floor * (1.0 - 1e-9));
      }
    }
  }
}

TEST(UserAse, ZeroWhenTheUserGetsNoPower) {
  const DropFixture f = make_drop(desk_config(AccessMode::CellFree), 0);
  PowerAllocation p = uniform_allocation(f.assoc, 0.1);
  p.eta.col(2).setZero();
  EXPECT_EQ(user_ase(f.gains, p, 2, f.cfg.bandwidth_hz), 0.0);
  EXPECT_GT(user_ase(f.gains, p, 1, f.cfg.bandwidth_hz), 0.0);
}

TEST(UserAse, DifferenceAndRatioFormsAgree) {
  for (int streams : {1, 2}) {
    for (AccessMode mode : {AccessMode::UserCentric, AccessMode::CellFree}) {
      ScenarioConfig c = desk_config(mode);
      c.mux_order = streams;
      for (int d = 0; d < 3; ++d) {
        const DropFixture f = make_drop(c, d);
        Rng rng = make_stream(5, static_cast<std::uint64_t>(d), StreamTag::Geometry);
        for (int t = 0; t < 10; ++t) {
          const PowerAllocation p = testing::random_allocation(f.assoc, 1.0, rng);
          for (int k = 0; k < c.num_ms; ++k) {
            const double a = user_ase(f.gains, p, k, c.bandwidth_hz);
            const double b = user_ase_ratio_form(f.gains, p, k, c.bandwidth_hz);
            const double o = testing::oracle_user_ase(f.gains, p, k, c.bandwidth_hz);
            EXPECT_LE(std::abs(a - b), 1e-9 * std::abs(a));
            EXPECT_LE(std::abs(a - o), 1e-9 * std::abs(a));
          }
        }
      }
    }
  }
}

TEST(UserAse, ScalarReduction) {
  ScenarioConfig c = desk_config(AccessMode::CellFree);
  c.num_aps = 1;
  c.num_ms = 1;
  c.uc_cluster_size = 1;
  const DropFixture f = make_drop(c, 3);
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Constant(1, 1, 0.05);
  const double b2 = std::norm(f.gains.block(0, 0, 0)(0, 0));
  const double expected = c.bandwidth_hz * std::log2(1.0 + 0.05 * b2 / (f.noise_w * c.n_ms));
  EXPECT_NEAR(user_ase(f.gains, p, 0, c.bandwidth_hz) / expected, 1.0, 1e-12);
}

TEST(UserAse, NonNegative) {
  const DropFixture f = make_drop(desk_config(AccessMode::CellFree), 5);
  Rng rng = make_stream(6, 0, StreamTag::Geometry);
  for (int t = 0; t < 50; ++t) {
    const PowerAllocation p = testing::random_allocation(f.assoc, 2.0, rng, false);
    for (int k = 0; k < f.cfg.num_ms; ++k) EXPECT_GE(user_ase(f.gains, p, k, f.cfg.bandwidth_hz), 0.0);
  }
}

PowerModel model_for(int aps, PowerModelKind kind) {
  ScenarioConfig c;
  c.num_aps = aps;
  return make_power_model(c, kind);
}

TEST(PowerConsumed, SilentNetwork) {
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(100, 5);
  EXPECT_EQ(power_consumed(p, model_for(100, PowerModelKind::Basic)), 100.0);
  EXPECT_EQ(power_consumed(p, model_for(100, PowerModelKind::IdleAware)), 50.0);
}

TEST(PowerConsumed, TwoActiveAps) {
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(2, 2);
  p.eta(0, 0) = 0.25;
  p.eta(0, 1) = 0.75;
  p.eta(1, 1) = 1.0;
  EXPECT_EQ(power_consumed(p, model_for(2, PowerModelKind::Basic)), 4.0);
  EXPECT_EQ(power_consumed(p, model_for(2, PowerModelKind::IdleAware)), 4.0);
}

TEST(PowerConsumed, IdleSavingsCountSilentAps) {
  Rng rng = make_stream(7, 0, StreamTag::Geometry);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double idle : {0.5, 0.3, 1.0}) {
    ScenarioConfig c;
    c.num_aps = 30;
    c.idle_fraction = idle;
    c.p_circuit_w = 0.8;
    const PowerModel basic = make_power_model(c, PowerModelKind::Basic);
    const PowerModel aware = make_power_model(c, PowerModelKind::IdleAware);
    for (int t = 0; t < 20; ++t) {
      PowerAllocation p;
      p.eta = Eigen::MatrixXd::Zero(30, 3);
      int silent = 0;
      for (int m = 0; m < 30; ++m) {
        if (u(rng) < 0.4) {
          ++silent;
          continue;
        }
        p.eta(m, m % 3) = u(rng);
      }
      EXPECT_NEAR(power_consumed(p, basic) - power_consumed(p, aware), (1.0 - idle) * 0.8 * silent,
                  1e-14 * power_consumed(p, basic));
    }
  }
}

TEST(PowerConsumed, AmplifierInefficiencyScalesRadiatedPower) {
  ScenarioConfig c;
  c.num_aps = 1;
  c.delta = 2.5;
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Constant(1, 1, 0.4);
  EXPECT_DOUBLE_EQ(power_consumed(p, make_power_model(c, PowerModelKind::Basic)), 2.0);
}

TEST(Gee, ZeroPowerGivesZero) {
  const DropFixture f = make_drop(desk_config(), 0);
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(f.cfg.num_aps, f.cfg.num_ms);
  const GeeReport r = gee(f.gains, p, make_power_model(f.cfg), f.cfg.bandwidth_hz);
  EXPECT_EQ(r.gee_mbit_per_joule, 0.0);
  EXPECT_EQ(r.sum_ase_bit_s_hz, 0.0);
}

TEST(Gee, ReportingIdentity) {
  EXPECT_EQ(mean_user_rate_bit_s(30.0, 200e6, 20), 300e6);
}

TEST(Gee, DefinitionAndBandwidthScaling) {
  const DropFixture f = make_drop(desk_config(AccessMode::CellFree), 1);
  const PowerAllocation p = uniform_allocation(f.assoc, 0.1);
  const PowerModel model = make_power_model(f.cfg);
  const GeeReport a = gee(f.gains, p, model, f.cfg.bandwidth_hz);
  double sum = 0.0;
  for (int k = 0; k < f.cfg.num_ms; ++k) sum += user_ase(f.gains, p, k, f.cfg.bandwidth_hz);
  EXPECT_DOUBLE_EQ(a.gee_mbit_per_joule, sum / power_consumed(p, model) / 1e6);
  EXPECT_DOUBLE_EQ(a.sum_ase_bit_s_hz, sum / f.cfg.bandwidth_hz);
  const GeeReport b = gee(f.gains, p, model, 2.0 * f.cfg.bandwidth_hz);
  EXPECT_NEAR(b.gee_mbit_per_joule / a.gee_mbit_per_joule, 2.0, 1e-12);
}

}  // namespace
}  // namespace cfsim
