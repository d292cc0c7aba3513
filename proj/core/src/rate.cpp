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

#include "cfsim/rate.hpp"

#include <cmath>
#include <numbers>

namespace cfsim {

GainTensor effective_gains(const EffectiveChannelSet& effective, const PrecoderSet& precoders,
                           const Association& assoc, double noise_w, const CMat& combiner) {
  const int K = effective.num_ms;
  const int M = effective.num_aps;
  const int P = static_cast<int>(combiner.cols());
  if (P > kMaxStreams) throw Error("effective_gains: too many streams");

  GainTensor g;
  g.num_ms = K;
  g.num_aps = M;
  g.streams = P;
  g.assoc = assoc;
  g.noise = (noise_w * (combiner.adjoint() * combiner)).eval();
  g.b.resize(static_cast<std::size_t>(K) * K * M);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      for (int m : assoc.servers[l]) g.block(k, l, m) = effective.at(k, m).adjoint() * precoders.at(l, m);
    }
  }
  return g;
}

GainTensor effective_gains(const ChannelSet& channels, const CMat& combiner,
                           const PrecoderSet& precoders, const Association& assoc, double noise_w) {
  return effective_gains(true_effective(channels, combiner), precoders, assoc, noise_w, combiner);
}

bool PowerAllocation::feasible(const Association& assoc, double p_max, double slack) const {
  for (int m = 0; m < eta.rows(); ++m) {
    double total = 0.0;
    for (int k = 0; k < eta.cols(); ++k) {
      const double v = eta(m, k);
      if (!(v >= 0.0)) return false;
      if (v != 0.0 && !assoc.serves(m, k)) return false;
      total += v;
    }
    if (total > p_max + slack) return false;
  }
  return true;
}

PowerModel make_power_model(const ScenarioConfig& cfg, PowerModelKind kind) {
  PowerModel pm;
  pm.kind = kind;
  pm.delta = cfg.delta;
  pm.circuit_w.assign(cfg.num_aps, cfg.p_circuit_w);
  pm.idle_fraction = cfg.idle_fraction;
  return pm;
}

PowerModel make_power_model(const ScenarioConfig& cfg) { return make_power_model(cfg, cfg.power_model); }

SmallMat stream_matrix(const GainTensor& g, const PowerAllocation& p, int k, int l) {
  SmallMat a = SmallMat::Zero(g.streams, g.streams);
  for (int m : g.assoc.servers[l]) {
    const double e = p.eta(m, l);
    if (e > 0.0) a += std::sqrt(e) * g.block(k, l, m);
  }
  return a;
}

SmallMat interference_covariance(const GainTensor& g, const PowerAllocation& p, int k) {
  SmallMat r = g.noise;
  for (int l = 0; l < g.num_ms; ++l) {
    if (l == k) continue;
    const SmallMat a = stream_matrix(g, p, k, l);
    r.noalias() += a * a.adjoint();
  }
  return r;
}

double log2det_hpd(const SmallMat& a) {
  Eigen::LLT<SmallMat> llt(a);
  if (llt.info() != Eigen::Success) throw Error("log2det_hpd: matrix is not positive definite");
  double s = 0.0;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < a.rows(); ++i) s += std::log2(l(i, i).real());
  return 2.0 * s;
}

double user_ase(const GainTensor& g, const PowerAllocation& p, int k, double bandwidth_hz) {
  const SmallMat r = interference_covariance(g, p, k);
  const SmallMat a = stream_matrix(g, p, k, k);
  SmallMat t = r;
  t.noalias() += a * a.adjoint();
  double v = 0.0;
  try {
    v = bandwidth_hz * (log2det_hpd(t) - log2det_hpd(r));
  } catch (const Error& e) {
    throw Error("user_ase: user " + std::to_string(k) + ": " + e.what());
  }
  if (!std::isfinite(v)) throw Error("user_ase: non-finite rate for user " + std::to_string(k));
  return std::max(v, 0.0);
}

double user_ase_ratio_form(const GainTensor& g, const PowerAllocation& p, int k, double bandwidth_hz) {
  const int P = g.streams;
  SmallMat r = g.noise;
  SmallMat s = SmallMat::Zero(P, P);
  for (int l = 0; l < g.num_ms; ++l) {
    SmallMat& target = (l == k) ? s : r;
    for (int m : g.assoc.servers[l]) {
      for (int mp : g.assoc.servers[l]) {
        const double w = std::sqrt(p.eta(m, l) * p.eta(mp, l));
        if (w == 0.0) continue;
        target.noalias() += w * g.block(k, l, m) * g.block(k, l, mp).adjoint();
      }
    }
  }
  const SmallMat x = SmallMat::Identity(P, P) + r.partialPivLu().solve(s);
  const double det = std::abs(x.partialPivLu().determinant());
  const double v = bandwidth_hz * std::log2(det);
  if (!std::isfinite(v)) throw Error("user_ase_ratio_form: non-finite rate for user " + std::to_string(k));
  return v;
}

double power_consumed(const PowerAllocation& p, const PowerModel& model) {
  double total = 0.0;
  for (int m = 0; m < p.eta.rows(); ++m) {
    const double radiated = p.ap_total(m);
    const double circuit = model.circuit_w[m];
    total += model.delta * radiated;
    if (model.kind == PowerModelKind::Basic || radiated > 0.0) {
      total += circuit;
    } else {
      total += model.idle_fraction * circuit;
    }
  }
  return total;
}

GeeReport gee(const GainTensor& g, const PowerAllocation& p, const PowerModel& model,
              double bandwidth_hz) {
  GeeReport rep;
  rep.per_user_ase_bit_s_hz.resize(g.num_ms);
  for (int k = 0; k < g.num_ms; ++k) {
    const double r = user_ase(g, p, k, bandwidth_hz);
    rep.sum_rate_bit_s += r;
    rep.per_user_ase_bit_s_hz[k] = r / bandwidth_hz;
  }
  rep.sum_ase_bit_s_hz = rep.sum_rate_bit_s / bandwidth_hz;
  rep.power_w = power_consumed(p, model);
  rep.gee_mbit_per_joule = rep.sum_rate_bit_s / rep.power_w / 1e6;
  return rep;
}

double mean_user_rate_bit_s(double sum_ase_bit_s_hz, double bandwidth_hz, int num_ms) {
  return sum_ase_bit_s_hz * bandwidth_hz / num_ms;
}

}  // namespace cfsim
