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
#include <vector>

#include "cfsim/channel.hpp"
#include "cfsim/rng.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// L = I_P (x) 1_{N_MS/P}: each of the P streams sums a disjoint antenna group.
CMat ms_combiner(int n_ms, int mux_order);

/// Per-user P x tau_p pilot matrices with Phi_k Phi_k^H = I_P.
struct PilotBook {
  std::vector<CMat> phi;
};

/// Rows of each Phi_k are +-1/sqrt(tau_p) and mutually orthogonal; different
/// users draw independently. With `orthogonal_across_users` all K*P rows are
/// mutually orthogonal (requires K*P <= tau_p).
///
/// Orthogonal +-1 rows are built as a random +-1 sequence multiplied
/// element-wise by periodically extended Walsh rows, so the number of rows
/// rounded up to a power of two must divide tau_p.
PilotBook generate_pilots(int num_ms, int mux_order, int tau_p, Rng& rng,
                          bool orthogonal_across_users = false);

enum class ChannelFlavor { True, Estimated };

/// S_{k,m} = H_{k,m} L_k (True) or its training estimate (Estimated), indexed [k * M + m].
struct EffectiveChannelSet {
  ChannelFlavor flavor = ChannelFlavor::True;
  int num_ms = 0;
  int num_aps = 0;
  std::vector<CMat> s;

  const CMat& at(int k, int m) const { return s[static_cast<std::size_t>(k) * num_aps + m]; }
  CMat& at(int k, int m) { return s[static_cast<std::size_t>(k) * num_aps + m]; }
};

EffectiveChannelSet true_effective(const ChannelSet& channels, const CMat& combiner);

/// Y_m = sum_k sqrt(p) H_{k,m} L Phi_k + W_m, S_hat_{k,m} = Y_m Phi_k^H / sqrt(p).
/// `noise[m]` is the N_AP x tau_p matrix W_m.
EffectiveChannelSet uplink_train(const ChannelSet& channels, const CMat& combiner,
                                 const PilotBook& pilots, double p_ul,
                                 const std::vector<CMat>& noise);

/// Draws W_m with i.i.d. CN(0, sigma_w2) entries from the drop's noise stream.
std::vector<CMat> draw_training_noise(int num_aps, int n_ap, int tau_p, double sigma_w2,
                                      std::uint64_t master_seed, std::uint64_t drop_index);

/// K(m): users served by AP m (ascending); M(k): APs serving user k (ascending).
struct Association {
  int num_aps = 0;
  int num_ms = 0;
  std::vector<std::vector<int>> served_by;
  std::vector<std::vector<int>> servers;

  bool serves(int m, int k) const;
};

/// Frobenius-norm association metric laid out M x K.
Eigen::MatrixXd association_metric(const ChannelSet& channels);
Eigen::MatrixXd association_metric(const EffectiveChannelSet& effective);

/// UC: every AP keeps its `cluster_size` strongest users, ties to the lower
/// index. CF: every AP serves everyone.
Association associate(const Eigen::MatrixXd& metric, AccessMode mode, int cluster_size);

/// Precoders Q_{k,m} (N_AP x P), stored [k * M + m]; entries for unserved pairs are empty.
struct PrecoderSet {
  Beamforming kind = Beamforming::FullyDigital;
  int num_ms = 0;
  int num_aps = 0;
  std::vector<CMat> q;
  /// Hybrid only: per-AP analog stage (N_AP x nRf) and per-(k,m) digital block (nRf x P).
  std::vector<CMat> analog;
  std::vector<CMat> digital;
  /// Hybrid only: per-AP BCD residual after each sweep.
  std::vector<std::vector<double>> residuals;

  const CMat& at(int k, int m) const { return q[static_cast<std::size_t>(k) * num_aps + m]; }
  CMat& at(int k, int m) { return q[static_cast<std::size_t>(k) * num_aps + m]; }
};

/// Zero-forcing precoders normalized to unit trace. The regularizer is
/// ridge_rel * tr(G G^H) / N_AP; with ridge_rel == 0 a rank-deficient Gram throws.
PrecoderSet zf_precoders(const EffectiveChannelSet& effective, const Association& assoc,
                         double ridge_rel, ZfScope scope = ZfScope::Global);

struct HybridFactors {
  CMat analog;   ///< N_AP x nRf, every entry of modulus 1/sqrt(N_AP)
  CMat digital;  ///< nRf x columns(F)
  std::vector<double> residuals;  ///< ||F - analog * digital||_F after each sweep
};

/// Block coordinate descent on ||F - W_RF W_BB||_F: least-squares digital
/// stage, then one exact per-entry phase update pass over the analog stage.
/// Both block steps are coordinate minimizers so the residual never grows.
HybridFactors hybrid_factorize(const CMat& target, int n_rf, int sweeps, const CMat& initial_analog);

/// Random-phase constant-modulus starting point.
CMat random_analog(int n_ap, int n_rf, Rng& rng);

/// Scaled DFT columns; unitary when n_rf == n_ap.
CMat dft_analog(int n_ap, int n_rf);

/// Factorizes each AP's stacked FD precoders and re-normalizes every user's
/// slice W_RF W_BB to unit trace.
PrecoderSet hybridize(const PrecoderSet& fd, const Association& assoc, int n_rf, int sweeps,
                      std::uint64_t master_seed, std::uint64_t drop_index);

}  // namespace cfsim
