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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cfsim/channel.hpp"

namespace cfsim::testing {

ScenarioConfig desk_config(AccessMode mode) {
  ScenarioConfig c;
  c.num_aps = 20;
  c.num_ms = 4;
  c.n_ap = 8;
  c.n_ms = 4;
  c.mux_order = 1;
  c.uc_cluster_size = 2;
  c.mode = mode;
  c.power_model = PowerModelKind::Basic;
  c.master_seed = 2026;
  return c;
}

DropFixture make_drop(const ScenarioConfig& cfg, int drop, Beamforming bf) {
  DropFixture f;
  f.cfg = cfg;
  const auto d = static_cast<std::uint64_t>(drop);
  const NetworkGeometry geom = drop_realization(cfg, d);
  f.channels = synth_drop_channels(cfg, geom, d);
  f.combiner = ms_combiner(cfg.n_ms, cfg.mux_order);
  f.effective = true_effective(f.channels, f.combiner);
  f.noise_w = derive_noise_power(cfg);
  f.assoc = associate(association_metric(f.channels), cfg.mode, cfg.uc_cluster_size);
  f.precoders = zf_precoders(f.effective, f.assoc, cfg.zf_ridge_rel, cfg.zf_scope);
  if (bf == Beamforming::Hybrid)
    f.precoders = hybridize(f.precoders, f.assoc, cfg.n_rf, cfg.bcd_sweeps, cfg.master_seed, d);
  f.gains = effective_gains(f.effective, f.precoders, f.assoc, f.noise_w, f.combiner);
  return f;
}

PowerAllocation random_allocation(const Association& assoc, double p_max, Rng& rng, bool interior) {
  std::uniform_real_distribution<double> u(interior ? 0.05 : 0.0, 1.0);
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(assoc.num_aps, assoc.num_ms);
  for (int m = 0; m < assoc.num_aps; ++m) {
    const auto& users = assoc.served_by[m];
    if (users.empty()) continue;
    std::vector<double> w(users.size());
    double sum = 0.0;
    for (auto& x : w) sum += (x = u(rng));
    const double budget = p_max * (interior ? 0.9 : u(rng));
    for (std::size_t j = 0; j < users.size(); ++j) p.eta(m, users[j]) = budget * w[j] / sum;
  }
  return p;
}

double ks_uniform_statistic(std::vector<double> s, double lo, double hi) {
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = (s[i] - lo) / (hi - lo);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

GridMax grid_maximize(const std::function<double(double)>& f, double hi, int points) {
  GridMax best{0.0, -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < points; ++i) {
    const double x = hi * i / (points - 1);
    const double v = f(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

Eigen::Vector2d brute_force_projection_2d(const Eigen::Vector2d& v, double p, double h) {
  Eigen::Vector2d best = Eigen::Vector2d::Zero();
  double best_d = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::round(p / h));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      const Eigen::Vector2d x(i * h, j * h);
      const double d = (x - v).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = x;
      }
    }
  }
  return best;
}

namespace {

/// sigma^2 L^H L + sum_{l != k} A_{k,l} A_{k,l}^H with every sum written out.
Eigen::MatrixXcd interference_by_loops(const GainTensor& g, const PowerAllocation& p, int k) {
  const int P = g.streams;
  Eigen::MatrixXcd r = g.noise;
  for (int l = 0; l < g.num_ms; ++l) {
    if (l == k) continue;
    for (int m : g.assoc.servers[l])
      for (int mp : g.assoc.servers[l]) {
        const double w = std::sqrt(p.eta(m, l) * p.eta(mp, l));
        for (int i = 0; i < P; ++i)
          for (int j = 0; j < P; ++j)
            for (int s = 0; s < P; ++s)
              r(i, j) += w * g.block(k, l, m)(i, s) * std::conj(g.block(k, l, mp)(j, s));
      }
  }
  return r;
}

}  // namespace

double finite_difference_g2(const GainTensor& g, const PowerAllocation& p, int m, int k, int l,
                            double h, double bandwidth_hz) {
  PowerAllocation plus = p;
  PowerAllocation minus = p;
  plus.eta(m, l) += h;
  minus.eta(m, l) -= h;
  const Eigen::MatrixXcd tp = interference_by_loops(g, plus, k);
  const Eigen::MatrixXcd tm = interference_by_loops(g, minus, k);
  const Eigen::MatrixXcd ratio = tm.partialPivLu().solve(tp);
  const double log2det = std::log2(std::abs(ratio.determinant()));
  return bandwidth_hz * log2det / (2.0 * h);
}

double oracle_user_ase(const GainTensor& g, const PowerAllocation& p, int k, double bandwidth_hz) {
  const int P = g.streams;
  const Eigen::MatrixXcd r = interference_by_loops(g, p, k);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(P, P);
  for (int m : g.assoc.servers[k])
    for (int mp : g.assoc.servers[k]) {
      const double w = std::sqrt(p.eta(m, k) * p.eta(mp, k));
      s += w * g.block(k, k, m) * g.block(k, k, mp).adjoint();
    }
  const Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(P, P) + r.inverse() * s;
  return bandwidth_hz * std::log2(std::abs(t.determinant()));
}

}  // namespace cfsim::testing
