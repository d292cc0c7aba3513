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

#include <benchmark/benchmark.h>

#include "cfsim/channel.hpp"
#include "cfsim/optimizer.hpp"
#include "cfsim/protocol.hpp"
#include "cfsim/rate.hpp"

namespace cfsim {
namespace {

ScenarioConfig desk() {
  ScenarioConfig c;
  c.num_aps = 20;
  c.num_ms = 4;
  c.n_ap = 8;
  c.n_ms = 4;
  c.mux_order = 1;
  c.uc_cluster_size = 2;
  c.master_seed = 2026;
  return c;
}

struct Drop {
  ScenarioConfig cfg;
  ChannelSet channels;
  CMat combiner;
  EffectiveChannelSet effective;
  Association assoc;
  PrecoderSet precoders;
  GainTensor gains;

  explicit Drop(ScenarioConfig c) : cfg(std::move(c)) {
    channels = synth_drop_channels(cfg, drop_realization(cfg, 0), 0);
    combiner = ms_combiner(cfg.n_ms, cfg.mux_order);
    effective = true_effective(channels, combiner);
    assoc = associate(association_metric(channels), cfg.mode, cfg.uc_cluster_size);
    precoders = zf_precoders(effective, assoc, cfg.zf_ridge_rel, cfg.zf_scope);
    gains = effective_gains(effective, precoders, assoc, derive_noise_power(cfg), combiner);
  }
};

void BM_ChannelSynthesis(benchmark::State& state) {
  ScenarioConfig c = desk();
  c.num_aps = static_cast<int>(state.range(0));
  const NetworkGeometry geom = drop_realization(c, 0);
  for (auto _ : state) benchmark::DoNotOptimize(synth_drop_channels(c, geom, 0));
}
BENCHMARK(BM_ChannelSynthesis)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ZeroForcing(benchmark::State& state) {
  ScenarioConfig c = desk();
  c.mode = state.range(0) ? AccessMode::CellFree : AccessMode::UserCentric;
  const Drop d(c);
  for (auto _ : state) benchmark::DoNotOptimize(zf_precoders(d.effective, d.assoc, c.zf_ridge_rel, c.zf_scope));
}
BENCHMARK(BM_ZeroForcing)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Hybridize(benchmark::State& state) {
  const Drop d(desk());
  for (auto _ : state)
    benchmark::DoNotOptimize(hybridize(d.precoders, d.assoc, d.cfg.n_rf, d.cfg.bcd_sweeps, d.cfg.master_seed, 0));
}
BENCHMARK(BM_Hybridize)->Unit(benchmark::kMicrosecond);

void BM_UserAse(benchmark::State& state) {
  ScenarioConfig c = desk();
  c.mode = AccessMode::CellFree;
  const Drop d(c);
  const PowerAllocation p = uniform_allocation(d.assoc, 0.1);
  for (auto _ : state)
    for (int k = 0; k < c.num_ms; ++k) benchmark::DoNotOptimize(user_ase(d.gains, p, k, c.bandwidth_hz));
}
BENCHMARK(BM_UserAse)->Unit(benchmark::kMicrosecond);

void BM_MaximizeGee(benchmark::State& state) {
  ScenarioConfig c = desk();
  c.mode = state.range(0) ? AccessMode::CellFree : AccessMode::UserCentric;
  const Drop d(c);
  const PowerModel model = make_power_model(c);
  for (auto _ : state)
    benchmark::DoNotOptimize(maximize_gee(d.gains, dbm_to_watts(20.0), model, c.bandwidth_hz, c.optimizer));
}
BENCHMARK(BM_MaximizeGee)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cfsim

BENCHMARK_MAIN();
