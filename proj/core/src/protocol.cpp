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

#include "cfsim/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace cfsim {
namespace {

int walsh_sign(unsigned row, unsigned col) { return (std::popcount(row & col) & 1U) ? -1 : 1; }

void normalize_unit_trace(CMat& q, const char* what) {
  const double fro = q.norm();
  if (!(fro > 0.0) || !std::isfinite(fro)) {
    throw Error(std::string(what) + ": precoder has zero or non-finite norm");
  }
  q /= fro;
}

}  // namespace

CMat ms_combiner(int n_ms, int mux_order) {
  if (mux_order <= 0 || n_ms <= 0 || n_ms % mux_order != 0) {
    throw Error("ms_combiner: P must divide N_MS (n_ms=" + std::to_string(n_ms) +
                ", P=" + std::to_string(mux_order) + ")");
  }
  const int group = n_ms / mux_order;
  CMat l = CMat::Zero(n_ms, mux_order);
  for (int p = 0; p < mux_order; ++p) l.block(p * group, p, group, 1).setOnes();
  return l;
}

PilotBook generate_pilots(int num_ms, int mux_order, int tau_p, Rng& rng,
                          bool orthogonal_across_users) {
  if (tau_p < mux_order) {
    throw Error("generate_pilots: tau_p (" + std::to_string(tau_p) + ") must be at least P (" +
                std::to_string(mux_order) + ")");
  }
  const int rows = orthogonal_across_users ? num_ms * mux_order : mux_order;
  if (orthogonal_across_users && rows > tau_p) {
    throw Error("generate_pilots: K*P = " + std::to_string(rows) +
                " mutually orthogonal pilots do not fit in tau_p = " + std::to_string(tau_p));
  }
  const unsigned period = std::bit_ceil(static_cast<unsigned>(rows));
  if (rows > 1 && tau_p % static_cast<int>(period) != 0) {
    throw Error("generate_pilots: tau_p = " + std::to_string(tau_p) + " must be a multiple of " +
                std::to_string(period) + " to hold " + std::to_string(rows) +
                " orthogonal binary rows");
  }

  std::bernoulli_distribution coin(0.5);
  const double amp = 1.0 / std::sqrt(static_cast<double>(tau_p));
  auto draw_base = [&] {
    std::vector<double> b(tau_p);
    for (auto& v : b) v = coin(rng) ? amp : -amp;
    return b;
  };

  PilotBook book;
  book.phi.resize(num_ms);
  std::vector<double> shared;
  if (orthogonal_across_users) shared = draw_base();
  for (int k = 0; k < num_ms; ++k) {
    const std::vector<double> base = orthogonal_across_users ? shared : draw_base();
    CMat phi(mux_order, tau_p);
    for (int p = 0; p < mux_order; ++p) {
      const unsigned row = orthogonal_across_users ? static_cast<unsigned>(k * mux_order + p)
                                                   : static_cast<unsigned>(p);
      for (int t = 0; t < tau_p; ++t) {
        phi(p, t) = base[t] * walsh_sign(row, static_cast<unsigned>(t) % period);
      }
    }
    book.phi[k] = std::move(phi);
  }
  return book;
}

EffectiveChannelSet true_effective(const ChannelSet& channels, const CMat& combiner) {
  EffectiveChannelSet e;
  e.flavor = ChannelFlavor::True;
  e.num_ms = channels.num_ms;
  e.num_aps = channels.num_aps;
  e.s.reserve(channels.h.size());
  for (const CMat& h : channels.h) e.s.push_back(h * combiner);
  return e;
}

EffectiveChannelSet uplink_train(const ChannelSet& channels, const CMat& combiner,
                                 const PilotBook& pilots, double p_ul,
                                 const std::vector<CMat>& noise) {
  const int K = channels.num_ms;
  const int M = channels.num_aps;
  const double sp = std::sqrt(p_ul);

  EffectiveChannelSet e;
  e.flavor = ChannelFlavor::Estimated;
  e.num_ms = K;
  e.num_aps = M;
  e.s.resize(static_cast<std::size_t>(K) * M);
  for (int m = 0; m < M; ++m) {
    CMat y = noise[m];
    for (int k = 0; k < K; ++k) y.noalias() += sp * (channels.at(k, m) * combiner) * pilots.phi[k];
    for (int k = 0; k < K; ++k) e.at(k, m) = (y * pilots.phi[k].adjoint()) / sp;
  }
  return e;
}

std::vector<CMat> draw_training_noise(int num_aps, int n_ap, int tau_p, double sigma_w2,
                                      std::uint64_t master_seed, std::uint64_t drop_index) {
  std::vector<CMat> w(num_aps);
  for (int m = 0; m < num_aps; ++m) {
    Rng rng = make_stream(master_seed, drop_index, StreamTag::Noise, static_cast<std::uint64_t>(m));
    CMat x(n_ap, tau_p);
    for (int c = 0; c < tau_p; ++c)
      for (int r = 0; r < n_ap; ++r) x(r, c) = complex_normal(rng, sigma_w2);
    w[m] = std::move(x);
  }
  return w;
}

bool Association::serves(int m, int k) const {
  const auto& s = served_by[m];
  return std::binary_search(s.begin(), s.end(), k);
}

Eigen::MatrixXd association_metric(const ChannelSet& channels) {
  Eigen::MatrixXd out(channels.num_aps, channels.num_ms);
  for (int m = 0; m < channels.num_aps; ++m)
    for (int k = 0; k < channels.num_ms; ++k) out(m, k) = channels.at(k, m).norm();
  return out;
}

Eigen::MatrixXd association_metric(const EffectiveChannelSet& effective) {
  Eigen::MatrixXd out(effective.num_aps, effective.num_ms);
  for (int m = 0; m < effective.num_aps; ++m)
    for (int k = 0; k < effective.num_ms; ++k) out(m, k) = effective.at(k, m).norm();
  return out;
}

Association associate(const Eigen::MatrixXd& metric, AccessMode mode, int cluster_size) {
  const int M = static_cast<int>(metric.rows());
  const int K = static_cast<int>(metric.cols());
  if (mode == AccessMode::UserCentric && (cluster_size < 1 || cluster_size > K)) {
    throw Error("associate: UC cluster size must satisfy 1 <= N <= K (N=" +
                std::to_string(cluster_size) + ", K=" + std::to_string(K) + ")");
  }
  Association a;
  a.num_aps = M;
  a.num_ms = K;
  a.served_by.resize(M);
  a.servers.resize(K);

  std::vector<int> order(K);
  for (int m = 0; m < M; ++m) {
    std::iota(order.begin(), order.end(), 0);
    if (mode == AccessMode::UserCentric) {
      std::stable_sort(order.begin(), order.end(),
                       [&](int a1, int a2) { return metric(m, a1) > metric(m, a2); });
      order.resize(cluster_size);
      std::sort(order.begin(), order.end());
    }
    a.served_by[m] = order;
    for (int k : order) a.servers[k].push_back(m);
    order.resize(K);
  }
  return a;
}

PrecoderSet zf_precoders(const EffectiveChannelSet& effective, const Association& assoc,
                         double ridge_rel, ZfScope scope) {
  const int K = effective.num_ms;
  const int M = effective.num_aps;
  const int n_ap = static_cast<int>(effective.at(0, 0).rows());

  auto solve_with = [&](const CMat& gram) {
    const double tr = gram.trace().real();
    CMat g = gram;
    if (ridge_rel > 0.0) {
      g.diagonal().array() += ridge_rel * tr / n_ap;
    } else {
      Eigen::SelfAdjointEigenSolver<CMat> eig(g, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      const double tol = std::max(ev.maxCoeff(), 0.0) * n_ap * 1e-12;
      const int rank = static_cast<int>((ev.array() > tol).count());
      if (rank < n_ap) {
        throw Error("zf_precoders: Gram matrix is rank deficient (rank " + std::to_string(rank) +
                    " of " + std::to_string(n_ap) + "); use a positive zf_ridge_rel");
      }
    }
    return Eigen::LLT<CMat>(g);
  };

  PrecoderSet ps;
  ps.kind = Beamforming::FullyDigital;
  ps.num_ms = K;
  ps.num_aps = M;
  ps.q.resize(static_cast<std::size_t>(K) * M);

  auto gram_over = [&](int m_begin, int m_end) {
    CMat g = CMat::Zero(n_ap, n_ap);
    for (int m = m_begin; m < m_end; ++m)
      for (int l = 0; l < K; ++l) g.noalias() += effective.at(l, m) * effective.at(l, m).adjoint();
    return g;
  };

  if (scope == ZfScope::Global) {
    const auto llt = solve_with(gram_over(0, M));
    for (int m = 0; m < M; ++m) {
      for (int k : assoc.served_by[m]) {
        CMat q = llt.solve(effective.at(k, m));
        normalize_unit_trace(q, "zf_precoders");
        ps.at(k, m) = std::move(q);
      }
    }
  } else {
    for (int m = 0; m < M; ++m) {
      const auto llt = solve_with(gram_over(m, m + 1));
      for (int k : assoc.served_by[m]) {
        CMat q = llt.solve(effective.at(k, m));
        normalize_unit_trace(q, "zf_precoders");
        ps.at(k, m) = std::move(q);
      }
    }
  }
  return ps;
}

CMat random_analog(int n_ap, int n_rf, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double amp = 1.0 / std::sqrt(static_cast<double>(n_ap));
  CMat w(n_ap, n_rf);
  for (int j = 0; j < n_rf; ++j)
    for (int i = 0; i < n_ap; ++i) w(i, j) = std::polar(amp, phase(rng));
  return w;
}

CMat dft_analog(int n_ap, int n_rf) {
  const double amp = 1.0 / std::sqrt(static_cast<double>(n_ap));
  CMat w(n_ap, n_rf);
  for (int j = 0; j < n_rf; ++j)
    for (int i = 0; i < n_ap; ++i)
      w(i, j) = std::polar(amp, -2.0 * std::numbers::pi * i * j / n_ap);
  return w;
}

HybridFactors hybrid_factorize(const CMat& target, int n_rf, int sweeps, const CMat& initial_analog) {
  const int n_ap = static_cast<int>(target.rows());
  if (n_rf < 1 || n_rf > n_ap) {
    throw Error("hybrid_factorize: nRf must satisfy 1 <= nRf <= N_AP (nRf=" + std::to_string(n_rf) +
                ", N_AP=" + std::to_string(n_ap) + ")");
  }
  if (sweeps < 1) throw Error("hybrid_factorize: sweeps must be at least 1");
  if (initial_analog.rows() != n_ap || initial_analog.cols() != n_rf) {
    throw Error("hybrid_factorize: initial analog matrix has the wrong shape");
  }
  const double amp = 1.0 / std::sqrt(static_cast<double>(n_ap));

  HybridFactors f;
  f.analog = initial_analog;
  f.residuals.reserve(sweeps);
  for (int s = 0; s < sweeps; ++s) {
    f.digital = f.analog.completeOrthogonalDecomposition().solve(target);

    CMat resid = target - f.analog * f.digital;
    for (int j = 0; j < n_rf; ++j) {
      const auto b = f.digital.row(j);
      const double bb = b.squaredNorm();
      for (int i = 0; i < n_ap; ++i) {
        const cd old = f.analog(i, j);
        // exact minimizer over the unit circle of ||r - w b||, r = resid_i + old * b
        const cd z = (resid.row(i) * b.adjoint())(0, 0) + old * bb;
        if (std::abs(z) == 0.0) continue;
        const cd next = amp * (z / std::abs(z));
        resid.row(i) -= (next - old) * b;
        f.analog(i, j) = next;
      }
    }
    f.residuals.push_back((target - f.analog * f.digital).norm());
  }
  return f;
}

PrecoderSet hybridize(const PrecoderSet& fd, const Association& assoc, int n_rf, int sweeps,
                      std::uint64_t master_seed, std::uint64_t drop_index) {
  PrecoderSet hy;
  hy.kind = Beamforming::Hybrid;
  hy.num_ms = fd.num_ms;
  hy.num_aps = fd.num_aps;
  hy.q.resize(fd.q.size());
  hy.digital.resize(fd.q.size());
  hy.analog.resize(fd.num_aps);
  hy.residuals.resize(fd.num_aps);

  for (int m = 0; m < fd.num_aps; ++m) {
    const auto& users = assoc.served_by[m];
    if (users.empty()) continue;
    const int n_ap = static_cast<int>(fd.at(users.front(), m).rows());
    const int p = static_cast<int>(fd.at(users.front(), m).cols());

    CMat stack(n_ap, static_cast<Eigen::Index>(users.size()) * p);
    for (std::size_t u = 0; u < users.size(); ++u) stack.middleCols(u * p, p) = fd.at(users[u], m);

    Rng rng = make_stream(master_seed, drop_index, StreamTag::Analog, static_cast<std::uint64_t>(m));
    HybridFactors f = hybrid_factorize(stack, n_rf, sweeps, random_analog(n_ap, n_rf, rng));

    for (std::size_t u = 0; u < users.size(); ++u) {
      const int k = users[u];
      CMat bb = f.digital.middleCols(u * p, p);
      CMat q = f.analog * bb;
      const double fro = q.norm();
      if (!(fro > 0.0)) throw Error("hybridize: hybrid precoder collapsed to zero at AP " + std::to_string(m));
      q /= fro;
      bb /= fro;
      hy.at(k, m) = std::move(q);
      hy.digital[static_cast<std::size_t>(k) * fd.num_aps + m] = std::move(bb);
    }
    hy.analog[m] = std::move(f.analog);
    hy.residuals[m] = std::move(f.residuals);
  }
  return hy;
}

}  // namespace cfsim
