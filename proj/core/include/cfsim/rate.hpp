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

#include <vector>

#include "cfsim/protocol.hpp"
#include "cfsim/scenario.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// B_{k,l,m} = L_k^H H_{k,m}^H Q_{l,m} for every user pair and every m in M(l),
/// plus the per-user noise matrix sigma_z^2 L^H L.
struct GainTensor {
  int num_ms = 0;
  int num_aps = 0;
  int streams = 0;
  SmallMat noise;
  Association assoc;
  std::vector<SmallMat> b;

  const SmallMat& block(int k, int l, int m) const {
    return b[(static_cast<std::size_t>(k) * num_ms + l) * num_aps + m];
  }
  SmallMat& block(int k, int l, int m) {
    return b[(static_cast<std::size_t>(k) * num_ms + l) * num_aps + m];
  }
};

/// Uses S_{k,m} = H_{k,m} L_k directly: B = S_{k,m}^H Q_{l,m}.
GainTensor effective_gains(const EffectiveChannelSet& effective, const PrecoderSet& precoders,
                           const Association& assoc, double noise_w, const CMat& combiner);
GainTensor effective_gains(const ChannelSet& channels, const CMat& combiner,
                           const PrecoderSet& precoders, const Association& assoc, double noise_w);

/// eta_{m,k} in watts, laid out M x K; zero outside the association.
struct PowerAllocation {
  Eigen::MatrixXd eta;

  double ap_total(int m) const { return eta.row(m).sum(); }
  /// Per-AP budget with slack, non-negativity and support inside `assoc`.
  bool feasible(const Association& assoc, double p_max, double slack = 1e-9) const;
};

struct PowerModel {
  PowerModelKind kind = PowerModelKind::Basic;
  double delta = 1.0;
  std::vector<double> circuit_w;  ///< per AP
  double idle_fraction = 0.5;
};

PowerModel make_power_model(const ScenarioConfig& cfg, PowerModelKind kind);
PowerModel make_power_model(const ScenarioConfig& cfg);

/// A_{k,l} = sum_{m in M(l)} sqrt(eta_{m,l}) B_{k,l,m}.
SmallMat stream_matrix(const GainTensor& g, const PowerAllocation& p, int k, int l);

/// R_k = sigma_z^2 L^H L + sum_{l != k} A_{k,l} A_{k,l}^H.
SmallMat interference_covariance(const GainTensor& g, const PowerAllocation& p, int k);

/// log2 det of a Hermitian positive definite matrix via Cholesky; throws if not PD.
double log2det_hpd(const SmallMat& a);

/// B [log2 det(R_k + A_kk A_kk^H) - log2 det(R_k)] in bit/s.
double user_ase(const GainTensor& g, const PowerAllocation& p, int k, double bandwidth_hz);

/// B log2 det(I + R_k^{-1} S_k) with R_k and S_k assembled from the explicit
/// double sums over (m, m') and the determinant taken by LU. Second route for
/// cross-checking user_ase.
double user_ase_ratio_form(const GainTensor& g, const PowerAllocation& p, int k, double bandwidth_hz);

/// Network consumption: sum_m delta P_T(m) + circuit term (idle-aware or not).
double power_consumed(const PowerAllocation& p, const PowerModel& model);

struct GeeReport {
  double gee_mbit_per_joule = 0.0;
  double sum_ase_bit_s_hz = 0.0;
  double sum_rate_bit_s = 0.0;
  double power_w = 0.0;
  std::vector<double> per_user_ase_bit_s_hz;
};

GeeReport gee(const GainTensor& g, const PowerAllocation& p, const PowerModel& model,
              double bandwidth_hz);

/// Average per-user rate in bit/s implied by a sum-ASE figure.
double mean_user_rate_bit_s(double sum_ase_bit_s_hz, double bandwidth_hz, int num_ms);

}  // namespace cfsim
