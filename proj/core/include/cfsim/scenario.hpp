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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cfsim/options.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// Large-scale propagation constants. These are configurable defaults for a
/// 73 GHz open-square deployment, not measured values.
struct PathLossParams {
  double pl0_db_offset = 32.4;  ///< PL0 = offset + 20 log10(f0 / 1 GHz)
  double exp_los = 2.0;
  double exp_nlos = 3.2;
  double shadow_sigma_db = 4.0;
  double los_d0_m = 18.0;
  double los_d1_m = 36.0;
  double ray_spread_deg = 5.0;  ///< Laplacian scale of per-ray angle offsets
};

struct ScenarioConfig {
  double carrier_hz = 73e9;
  double bandwidth_hz = 200e6;
  double area_side_m = 250.0;
  int num_aps = 100;
  int num_ms = 5;
  int n_ap = 16;
  int n_ms = 8;
  int mux_order = 1;
  int uc_cluster_size = 2;
  AccessMode mode = AccessMode::UserCentric;
  int tau_p = 64;
  int tau_c = 200;
  double p_ul_w = 1e-3;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 6.0;
  double p_max_w = 0.1;
  double delta = 1.0;
  double p_circuit_w = 1.0;
  PowerModelKind power_model = PowerModelKind::IdleAware;
  double idle_fraction = 0.5;
  int n_cl = 4;
  int n_ray = 6;
  int n_rf = 4;
  int drops = 50;
  std::uint64_t master_seed = 1;
  PathLossParams path_loss;

  double zf_ridge_rel = 1e-9;
  ZfScope zf_scope = ZfScope::Global;
  int bcd_sweeps = 20;
  bool orthogonal_pilots = false;

  OptimizerOptions optimizer;
};

/// Throws ConfigError naming the first field that breaks an invariant.
void validate(const ScenarioConfig& cfg);

/// Parses a flat `key = value` document (`#` starts a comment). Keys not
/// mentioned keep their defaults; unknown keys are rejected.
ScenarioConfig load_config(std::string_view text);
ScenarioConfig load_config_file(const std::filesystem::path& path);

/// Canonical key list accepted by load_config, in document order.
const std::vector<std::string>& config_keys();

/// Serializes every key; load_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ScenarioConfig& cfg);

/// Thermal noise power over the band including the receiver noise figure, W.
double derive_noise_power(const ScenarioConfig& cfg);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// One Monte Carlo placement of APs and MSs plus the per-link large-scale
/// variates. Link quantities are stored row-major as [m * K + k].
struct NetworkGeometry {
  int num_aps = 0;
  int num_ms = 0;
  std::vector<Point> ap_positions;
  std::vector<Point> ms_positions;
  std::vector<bool> los_flag;
  std::vector<double> shadowing_db;
  std::vector<double> distances;

  std::size_t link(int m, int k) const { return static_cast<std::size_t>(m) * num_ms + k; }
  bool los(int m, int k) const { return los_flag[link(m, k)]; }
  double shadow_db(int m, int k) const { return shadowing_db[link(m, k)]; }
  double distance(int m, int k) const { return distances[link(m, k)]; }
};

NetworkGeometry drop_realization(const ScenarioConfig& cfg, std::uint64_t drop_index);

}  // namespace cfsim
