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

#include <functional>
#include <vector>

#include "cfsim/rng.hpp"
#include "cfsim/scenario.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// Half-wavelength ULA steering vector (1/sqrt(n)) [1, e^{j pi sin t}, ...].
CVec array_response(double angle_rad, int n);

/// LOS probability p(d) = min(d0/d, 1)(1 - e^{-d/d1}) + e^{-d/d1}.
double los_probability(double d, double d0, double d1);
double los_probability(double d, const PathLossParams& p);

/// Linear power gain 10^{-(PL0 + 10 n log10 d + shadow)/10}. Throws for d <= 0.
double path_loss(double d, bool los, double shadow_db, double carrier_hz, const PathLossParams& p);

struct Ray {
  double angle_ap = 0.0;  ///< AoD at the AP array
  double angle_ms = 0.0;  ///< AoA at the MS array
  cd gain{1.0, 0.0};
  double path_length = 1.0;
};

/// Scattered part of one link: n_cl clusters of n_ray rays, stored cluster-major.
struct ClusterGeometry {
  int n_cl = 0;
  int n_ray = 0;
  std::vector<Ray> rays;
};

/// Per-link state feeding the LOS term.
struct LinkState {
  double distance = 1.0;
  bool los = false;
  double los_phase = 0.0;
  double los_angle_ap = 0.0;
  double los_angle_ms = 0.0;
};

/// Draws cluster centres U(-pi/2, pi/2), Laplacian ray offsets and CN(0,1) gains.
/// Every ray shares the link distance as its path length (narrowband model).
ClusterGeometry draw_clusters(int n_cl, int n_ray, double ray_spread_deg, double distance, Rng& rng);

using AttenuationFn = std::function<double(double path_length)>;

/// H = gamma sum alpha sqrt(L(r)) a_AP a_MS^H + H_LOS with gamma = sqrt(N_AP N_MS / (N_cl N_ray)).
/// H_LOS = sqrt(N_AP N_MS) e^{j phase} sqrt(L(d)) a_AP a_MS^H, present iff link.los.
CMat assemble_channel(const ClusterGeometry& clusters, const LinkState& link, int n_ap, int n_ms,
                      const AttenuationFn& attenuation);

/// Geometric LOS angles for the (m, k) link. Arrays lie along the y axis so the
/// broadside direction is +x.
LinkState link_state(const NetworkGeometry& geom, int m, int k);

/// Full synthesis of H_{k,m}: consumes the LOS phase first, then the cluster draws.
CMat synth_channel(const ScenarioConfig& cfg, const NetworkGeometry& geom, int k, int m, Rng& rng);

/// All K x M propagation matrices of one drop, indexed [k * M + m].
struct ChannelSet {
  int num_ms = 0;
  int num_aps = 0;
  std::vector<CMat> h;

  const CMat& at(int k, int m) const { return h[static_cast<std::size_t>(k) * num_aps + m]; }
  CMat& at(int k, int m) { return h[static_cast<std::size_t>(k) * num_aps + m]; }
};

/// Each (k, m) link gets its own substream, so links can be synthesized in any order.
ChannelSet synth_drop_channels(const ScenarioConfig& cfg, const NetworkGeometry& geom,
                               std::uint64_t drop_index);

}  // namespace cfsim
