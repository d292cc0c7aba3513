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

#include "cfsim/channel.hpp"

#include <cmath>
#include <numbers>

namespace cfsim {

CVec array_response(double angle_rad, int n) {
  CVec a(n);
  const double phase = std::numbers::pi * std::sin(angle_rad);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) a[i] = std::polar(scale, phase * i);
  return a;
}

double los_probability(double d, double d0, double d1) {
  if (d <= 0.0) return 1.0;
  const double e = std::exp(-d / d1);
  return std::min(d0 / d, 1.0) * (1.0 - e) + e;
}

double los_probability(double d, const PathLossParams& p) {
  return los_probability(d, p.los_d0_m, p.los_d1_m);
}

double path_loss(double d, bool los, double shadow_db, double carrier_hz, const PathLossParams& p) {
  if (!(d > 0.0)) throw Error("path_loss: distance must be positive (got " + std::to_string(d) + ")");
  const double pl0 = p.pl0_db_offset + 20.0 * std::log10(carrier_hz / 1e9);
  const double n = los ? p.exp_los : p.exp_nlos;
  const double pl_db = pl0 + 10.0 * n * std::log10(d) + shadow_db;
  return std::pow(10.0, -pl_db / 10.0);
}

ClusterGeometry draw_clusters(int n_cl, int n_ray, double ray_spread_deg, double distance, Rng& rng) {
  std::uniform_real_distribution<double> centre(-std::numbers::pi / 2, std::numbers::pi / 2);
  const double spread = ray_spread_deg * std::numbers::pi / 180.0;

  ClusterGeometry cg;
  cg.n_cl = n_cl;
  cg.n_ray = n_ray;
  cg.rays.reserve(static_cast<std::size_t>(n_cl) * n_ray);
  for (int i = 0; i < n_cl; ++i) {
    const double c_ap = centre(rng);
    const double c_ms = centre(rng);
    for (int l = 0; l < n_ray; ++l) {
      Ray r;
      r.angle_ap = c_ap + laplacian(rng, spread);
      r.angle_ms = c_ms + laplacian(rng, spread);
      r.gain = complex_normal(rng, 1.0);
      r.path_length = distance;
      cg.rays.push_back(r);
    }
  }
  return cg;
}

CMat assemble_channel(const ClusterGeometry& clusters, const LinkState& link, int n_ap, int n_ms,
                      const AttenuationFn& attenuation) {
  const double nn = static_cast<double>(n_ap) * n_ms;
  const double gamma = std::sqrt(nn / (static_cast<double>(clusters.n_cl) * clusters.n_ray));

  CMat h = CMat::Zero(n_ap, n_ms);
  for (const Ray& r : clusters.rays) {
    const cd w = gamma * r.gain * std::sqrt(attenuation(r.path_length));
    h.noalias() += w * array_response(r.angle_ap, n_ap) * array_response(r.angle_ms, n_ms).adjoint();
  }
  if (link.los) {
    const cd w = std::sqrt(nn) * std::polar(1.0, link.los_phase) * std::sqrt(attenuation(link.distance));
    h.noalias() += w * array_response(link.los_angle_ap, n_ap) *
                   array_response(link.los_angle_ms, n_ms).adjoint();
  }
  return h;
}

LinkState link_state(const NetworkGeometry& geom, int m, int k) {
  LinkState s;
  s.distance = geom.distance(m, k);
  s.los = geom.los(m, k);
  const double dx = geom.ms_positions[k].x - geom.ap_positions[m].x;
  const double dy = geom.ms_positions[k].y - geom.ap_positions[m].y;
  // angle from broadside (+x for the AP, -x for the MS facing back)
  s.los_angle_ap = std::atan2(dy, std::abs(dx));
  s.los_angle_ms = std::atan2(-dy, std::abs(dx));
  return s;
}

CMat synth_channel(const ScenarioConfig& cfg, const NetworkGeometry& geom, int k, int m, Rng& rng) {
  LinkState link = link_state(geom, m, k);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  link.los_phase = phase(rng);

  const ClusterGeometry cg =
      draw_clusters(cfg.n_cl, cfg.n_ray, cfg.path_loss.ray_spread_deg, link.distance, rng);
  const double shadow = geom.shadow_db(m, k);
  const bool los = link.los;
  const auto attenuation = [&](double r) {
    return path_loss(r, los, shadow, cfg.carrier_hz, cfg.path_loss);
  };
  return assemble_channel(cg, link, cfg.n_ap, cfg.n_ms, attenuation);
}

ChannelSet synth_drop_channels(const ScenarioConfig& cfg, const NetworkGeometry& geom,
                               std::uint64_t drop_index) {
  ChannelSet cs;
  cs.num_ms = cfg.num_ms;
  cs.num_aps = cfg.num_aps;
  cs.h.resize(static_cast<std::size_t>(cfg.num_ms) * cfg.num_aps);
  for (int k = 0; k < cfg.num_ms; ++k) {
    for (int m = 0; m < cfg.num_aps; ++m) {
      Rng rng = make_stream(cfg.master_seed, drop_index, StreamTag::Channel,
                            static_cast<std::uint64_t>(k) * cfg.num_aps + m);
      cs.at(k, m) = synth_channel(cfg, geom, k, m, rng);
    }
  }
  return cs;
}

}  // namespace cfsim
