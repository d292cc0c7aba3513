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

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include "cfsim/channel.hpp"
#include "cfsim/harness.hpp"
#include "cfsim/optimizer.hpp"
#include "cfsim/protocol.hpp"
#include "cfsim/rate.hpp"

namespace cfsim {
namespace {

struct Tiny {
  ScenarioConfig cfg;
  GainTensor gains;
};

Tiny tiny_drop(int m_aps, int k_ms, AccessMode mode) {
  Tiny t;
  t.cfg.num_aps = m_aps;
  t.cfg.num_ms = k_ms;
  t.cfg.n_ap = 8;
  t.cfg.n_ms = 4;
  t.cfg.uc_cluster_size = std::min(2, k_ms);
  t.cfg.area_side_m = 60;
  t.cfg.mode = mode;
  t.cfg.master_seed = 7;
  const auto geom = drop_realization(t.cfg, 0);
  const auto ch = synth_drop_channels(t.cfg, geom, 0);
  const CMat l = ms_combiner(t.cfg.n_ms, t.cfg.mux_order);
  const auto s = true_effective(ch, l);
  const auto assoc = associate(association_metric(ch), mode, t.cfg.uc_cluster_size);
  const auto q = zf_precoders(s, assoc, t.cfg.zf_ridge_rel);
  t.gains = effective_gains(s, q, assoc, derive_noise_power(t.cfg), l);
  return t;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, const std::function<bool()>& body) {
    bool ok = false;
    try {
      ok = body();
    } catch (const std::exception& e) {
      out << "  exception: " << e.what() << '\n';
    }
    out << (ok ? "[PASS] " : "[FAIL] ") << name << '\n';
    if (!ok) ++failures;
  };

  check("noise power at 1 MHz, F = 0 dB is -114 dBm", [] {
    ScenarioConfig c;
    c.bandwidth_hz = 1e6;
    c.noise_figure_db = 0;
    return std::abs(watts_to_dbm(derive_noise_power(c)) + 114.0) < 1e-9;
  });

  check("ULA responses with sin difference 2/n are orthogonal", [] {
    const int n = 8;
    const double t1 = 0.3;
    const double t2 = std::asin(std::sin(t1) - 2.0 / n);
    return std::abs(array_response(t1, n).dot(array_response(t2, n))) < 1e-12;
  });

  check("box-simplex projection of [0.6, 0.6] onto Pmax = 1", [] {
    Eigen::VectorXd v(2);
    v << 0.6, 0.6;
    const auto x = project_box_simplex(v, 1.0);
    return std::abs(x[0] - 0.5) < 1e-15 && std::abs(x[1] - 0.5) < 1e-15;
  });

  check("ZF precoders have unit trace", [] {
    ScenarioConfig c;
    c.num_aps = 4;
    c.num_ms = 3;
    c.n_ap = 8;
    c.n_ms = 4;
    const auto geom = drop_realization(c, 1);
    const auto ch = synth_drop_channels(c, geom, 1);
    const auto s = true_effective(ch, ms_combiner(c.n_ms, c.mux_order));
    const auto assoc = associate(association_metric(ch), AccessMode::CellFree, 2);
    const auto q = zf_precoders(s, assoc, c.zf_ridge_rel);
    for (const auto& m : q.q)
      if (m.size() && std::abs((m * m.adjoint()).trace().real() - 1.0) > 1e-12) return false;
    return true;
  });

  check("difference and ratio forms of the user rate agree", [] {
    const Tiny t = tiny_drop(4, 3, AccessMode::UserCentric);
    const auto p = uniform_allocation(t.gains.assoc, 0.1);
    for (int k = 0; k < t.gains.num_ms; ++k) {
      const double a = user_ase(t.gains, p, k, t.cfg.bandwidth_hz);
      const double b = user_ase_ratio_form(t.gains, p, k, t.cfg.bandwidth_hz);
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) return false;
    }
    return true;
  });

  check("analytic g2 gradient matches central differences", [] {
    const Tiny t = tiny_drop(4, 3, AccessMode::CellFree);
    auto p = uniform_allocation(t.gains.assoc, 0.1);
    const int m = 1;
    const int k = 0;
    const auto grad = grad_g2_wrt_ap(t.gains, p, m, k, t.cfg.bandwidth_hz);
    const auto& users = t.gains.assoc.served_by[m];
    for (std::size_t j = 0; j < users.size(); ++j) {
      const int l = users[j];
      const double h = 1e-6 * std::max(p.eta(m, l), 1e-3);
      auto plus = p;
      auto minus = p;
      plus.eta(m, l) += h;
      minus.eta(m, l) -= h;
      const double fd = (g_split_eval(t.gains, plus, k, t.cfg.bandwidth_hz).g2 -
                         g_split_eval(t.gains, minus, k, t.cfg.bandwidth_hz).g2) /
                        (2 * h);
      if (std::abs(fd - grad[static_cast<Eigen::Index>(j)]) > 1e-4 * std::max(std::abs(fd), 1.0))
        return false;
    }
    return true;
  });

  check("single-link GEE maximization matches a grid search", [] {
    Tiny t = tiny_drop(1, 1, AccessMode::CellFree);
    const double pmax = 1.0;
    ScenarioConfig c = t.cfg;
    c.power_model = PowerModelKind::Basic;
    const PowerModel model = make_power_model(c);
    const auto res = maximize_gee(t.gains, pmax, model, c.bandwidth_hz, c.optimizer);
    double best = 0.0;
    PowerAllocation p = uniform_allocation(t.gains.assoc, pmax);
    for (int i = 0; i <= 10000; ++i) {
      p.eta(0, 0) = pmax * i / 10000.0;
      best = std::max(best, gee(t.gains, p, model, c.bandwidth_hz).gee_mbit_per_joule);
    }
    const double got = gee(t.gains, res.alloc, model, c.bandwidth_hz).gee_mbit_per_joule;
    return std::abs(got - best) <= 0.01 * best;
  });

  out << (failures == 0 ? "selftest: all checks passed\n" : "selftest: FAILED\n");
  return failures == 0;
}

}  // namespace cfsim
