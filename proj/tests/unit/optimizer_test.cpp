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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cfsim/optimizer.hpp"
#include "oracles.hpp"

namespace cfsim {
namespace {

using testing::DropFixture;
using testing::desk_config;
using testing::make_drop;

Association fixed_assoc(AccessMode mode, int aps, int users, int n) {
  Eigen::MatrixXd metric(aps, users);
  for (int m = 0; m < aps; ++m)
    for (int k = 0; k < users; ++k) metric(m, k) = 1.0 + ((m * 7 + k * 3) % 5);
  return associate(metric, mode, n);
}

TEST(UniformAllocation, SplitsTheBudget) {
  const Association uc = fixed_assoc(AccessMode::UserCentric, 6, 5, 2);
  const PowerAllocation p = uniform_allocation(uc, 1.0);
  for (int m = 0; m < 6; ++m) {
    for (int k = 0; k < 5; ++k) EXPECT_EQ(p.eta(m, k), uc.serves(m, k) ? 0.5 : 0.0);
    EXPECT_EQ(p.ap_total(m), 1.0);
  }
  EXPECT_TRUE(p.feasible(uc, 1.0, 0.0));

  const Association cf = fixed_assoc(AccessMode::CellFree, 3, 5, 2);
  const PowerAllocation q = uniform_allocation(cf, 1.0);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 5; ++k) EXPECT_EQ(q.eta(m, k), 0.2);
}

TEST(GSplit, DifferenceIsTheUserRate) {
  for (AccessMode mode : {AccessMode::UserCentric, AccessMode::CellFree}) {
    const DropFixture f = make_drop(desk_config(mode), 0);
    Rng rng = make_stream(1, 0, StreamTag::Geometry);
    for (int t = 0; t < 10; ++t) {
      const PowerAllocation p = testing::random_allocation(f.assoc, 0.5, rng);
      for (int k = 0; k < f.cfg.num_ms; ++k) {
        const GSplit s = g_split_eval(f.gains, p, k, f.cfg.bandwidth_hz);
        const double r = user_ase(f.gains, p, k, f.cfg.bandwidth_hz);
        EXPECT_LE(std::abs((s.g1 - s.g2) - r), 1e-9 * r);
      }
    }
  }
}

TEST(GSplit, NoiseOnlyAtZeroPower) {
  const DropFixture f = make_drop(desk_config(), 0);
  PowerAllocation p;
  p.eta = Eigen::MatrixXd::Zero(f.cfg.num_aps, f.cfg.num_ms);
  const GSplit s = g_split_eval(f.gains, p, 1, f.cfg.bandwidth_hz);
  const double expected = f.cfg.bandwidth_hz * std::log2(f.noise_w * f.cfg.n_ms);
  EXPECT_DOUBLE_EQ(s.g1, expected);
  EXPECT_DOUBLE_EQ(s.g2, expected);
}

ScenarioConfig single_user_config(int aps) {
  ScenarioConfig c = desk_config(AccessMode::CellFree);
  c.num_aps = aps;
  c.num_ms = 1;
  c.uc_cluster_size = 1;
  return c;
}

TEST(GSplit, SingleUserHasConstantG2AndZeroGradient) {
  const DropFixture f = make_drop(single_user_config(4), 0);
  Rng rng = make_stream(2, 0, StreamTag::Geometry);
  const double g2 = g_split_eval(f.gains, uniform_allocation(f.assoc, 0.1), 0, f.cfg.bandwidth_hz).g2;
  for (int t = 0; t < 5; ++t) {
    const PowerAllocation p = testing::random_allocation(f.assoc, 0.3, rng);
    EXPECT_EQ(g_split_eval(f.gains, p, 0, f.cfg.bandwidth_hz).g2, g2);
    for (int m = 0; m < 4; ++m)
      EXPECT_EQ(grad_g2_wrt_ap(f.gains, p, m, 0, f.cfg.bandwidth_hz).norm(), 0.0);
  }
}

TEST(GradG2, OwnComponentIsZero) {
  const DropFixture f = make_drop(desk_config(AccessMode::CellFree), 1);
  const PowerAllocation p = uniform_allocation(f.assoc, 0.1);
  for (int m = 0; m < f.cfg.num_aps; ++m)
    for (int k = 0; k < f.cfg.num_ms; ++k) {
      const auto& users = f.assoc.served_by[m];
      const Eigen::VectorXd g = grad_g2_wrt_ap(f.gains, p, m, k, f.cfg.bandwidth_hz);
      for (std::size_t j = 0; j < users.size(); ++j)
        if (users[j] == k) EXPECT_EQ(g[static_cast<Eigen::Index>(j)], 0.0);
    }
}

void check_gradient_against_differences(AccessMode mode, int streams) {
  ScenarioConfig c = desk_config(mode);
  c.mux_order = streams;
  int checked = 0;
  for (int d = 0; d < 5; ++d) {
    const DropFixture f = make_drop(c, d);
    Rng rng = make_stream(3, static_cast<std::uint64_t>(d), StreamTag::Geometry);
    std::uniform_int_distribution<int> pick_ap(0, c.num_aps - 1);
    std::uniform_int_distribution<int> pick_user(0, c.num_ms - 1);
    for (int t = 0; t < 50; ++t) {
      const PowerAllocation p = testing::random_allocation(f.assoc, 0.5, rng);
      const int m = pick_ap(rng);
      const int k = pick_user(rng);
      const auto& users = f.assoc.served_by[m];
      const Eigen::VectorXd g = grad_g2_wrt_ap(f.gains, p, m, k, c.bandwidth_hz);
      const double scale = g.cwiseAbs().maxCoeff();
      for (std::size_t j = 0; j < users.size(); ++j) {
        const int l = users[j];
        if (l == k) continue;
        const double h = 1e-4 * p.eta(m, l);
        const double fd = testing::finite_difference_g2(f.gains, p, m, k, l, h, c.bandwidth_hz);
        const double an = g[static_cast<Eigen::Index>(j)];
        EXPECT_LE(std::abs(an - fd), 1e-4 * std::max(std::abs(fd), 1e-6 * scale))
            << "drop " << d << " m " << m << " k " << k << " l " << l;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(GradG2, MatchesCentralDifferencesCellFree) { check_gradient_against_differences(AccessMode::CellFree, 1); }
TEST(GradG2, MatchesCentralDifferencesUserCentric) {
  check_gradient_against_differences(AccessMode::UserCentric, 1);
}
TEST(GradG2, MatchesCentralDifferencesTwoStreams) {
  check_gradient_against_differences(AccessMode::CellFree, 2);
}

TEST(Surrogate, TightAtTheAnchor) {
  const DropFixture f = make_drop(desk_config(AccessMode::CellFree), 0);
  Rng rng = make_stream(4, 0, StreamTag::Geometry);
  const PowerAllocation p = testing::random_allocation(f.assoc, 0.5, rng);
  for (int m = 0; m < f.cfg.num_aps; m += 3)
    for (int k = 0; k < f.cfg.num_ms; ++k) {
      const double s = surrogate_rate(f.gains, p, p, m, k, f.cfg.bandwidth_hz);
      const double r = user_ase(f.gains, p, k, f.cfg.bandwidth_hz);
      EXPECT_LE(std::abs(s - r), 1e-9 * r);
    }
}

// With a single AP every stream covariance is affine in that AP's powers, so
// g2 is concave there and its linearization is a global upper bound.
TEST(Surrogate, LowerBoundsTheRateForASingleAp) {
  ScenarioConfig c = desk_config(AccessMode::CellFree);
  c.num_aps = 1;
  for (int d = 0; d < 5; ++d) {
    const DropFixture f = make_drop(c, d);
    Rng rng = make_stream(5, static_cast<std::uint64_t>(d), StreamTag::Geometry);
    for (int t = 0; t < 20; ++t) {
      const PowerAllocation p0 = testing::random_allocation(f.assoc, 0.5, rng, false);
      const PowerAllocation p = testing::random_allocation(f.assoc, 0.5, rng, false);
      for (int k = 0; k < c.num_ms; ++k) {
        const double s = surrogate_rate(f.gains, p, p0, 0, k, c.bandwidth_hz);
        const double r = user_ase(f.gains, p, k, c.bandwidth_hz);
        EXPECT_LE(s, r + 1e-9 * std::max(r, 1.0)) << "drop " << d << " trial " << t << " k " << k;
      }
    }
  }
}

// Once other APs share a stream the sqrt cross terms break concavity of g2, so the
// bound is not global. The safeguard in the optimizer covers this case.
TEST(Surrogate, CanExceedTheRateWhenStreamsAreShared) {
  const DropFixture f = make_drop(desk_config(AccessMode::CellFree), 4);
  Rng rng = make_stream(5, 4, StreamTag::Geometry);
  int above = 0;
  for (int t = 0; t < 20; ++t) {
    const PowerAllocation p0 = testing::random_allocation(f.assoc, 0.5, rng, false);
    PowerAllocation p = p0;
    p.eta.row(t % f.cfg.num_aps) = testing::random_allocation(f.assoc, 0.5, rng, false).eta.row(t % f.cfg.num_aps);
    for (int k = 0; k < f.cfg.num_ms; ++k)
      if (surrogate_rate(f.gains, p, p0, t % f.cfg.num_aps, k, f.cfg.bandwidth_hz) >
          user_ase(f.gains, p, k, f.cfg.bandwidth_hz))
        ++above;
  }
  EXPECT_GT(above, 0);
}

TEST(Surrogate, ConstantWhenTheApCannotReachTheUser) {
  DropFixture f = make_drop(desk_config(AccessMode::UserCentric), 0);
  const int m = 0;
  int k = 0;
  while (f.assoc.serves(m, k)) ++k;
  for (int l : f.assoc.served_by[m]) f.gains.block(k, l, m).setZero();
  Rng rng = make_stream(6, 0, StreamTag::Geometry);
  const PowerAllocation p0 = testing::random_allocation(f.assoc, 0.5, rng);
  const double base = surrogate_rate(f.gains, p0, p0, m, k, f.cfg.bandwidth_hz);
  for (int t = 0; t < 5; ++t) {
    PowerAllocation p = p0;
    p.eta.row(m) = testing::random_allocation(f.assoc, 0.5, rng).eta.row(m);
    EXPECT_DOUBLE_EQ(surrogate_rate(f.gains, p, p0, m, k, f.cfg.bandwidth_hz), base);
  }
}

TEST(Projection, SymmetricShift) {
  Eigen::VectorXd v(2);
  v << 0.6, 0.6;
  const Eigen::VectorXd x = project_box_simplex(v, 1.0);
  EXPECT_NEAR(x[0], 0.5, 1e-15);
  EXPECT_NEAR(x[1], 0.5, 1e-15);
}

TEST(Projection, FeasiblePointsAreFixed) {
  Eigen::VectorXd v(4);
  v << 0.1, 0.0, 0.3, 0.2;
  EXPECT_EQ(project_box_simplex(v, 1.0), v);
  EXPECT_EQ(project_box_simplex(v, 0.6), v);
}

TEST(Projection, ClampsNegativesOnly) {
  Eigen::VectorXd v(3);
  v << -1.0, 0.2, 0.3;
  const Eigen::VectorXd x = project_box_simplex(v, 1.0);
  EXPECT_EQ(x, Eigen::Vector3d(0.0, 0.2, 0.3));
}

TEST(Projection, MatchesBruteForceIn2d) {
  Rng rng = make_stream(7, 0, StreamTag::Geometry);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Vector2d v(u(rng), u(rng));
    const Eigen::VectorXd x = project_box_simplex(v, 1.0);
    const Eigen::Vector2d o = testing::brute_force_projection_2d(v, 1.0, 1e-3);
    EXPECT_LE((x - o).cwiseAbs().maxCoeff(), 2e-3) << v.transpose();
  }
}

TEST(Projection, OutputIsFeasibleAndNoFartherThanFeasibleProbes) {
  Rng rng = make_stream(8, 0, StreamTag::Geometry);
  std::normal_distribution<double> n(0.3, 1.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd v(5);
    for (auto& e : v) e = n(rng);
    const Eigen::VectorXd x = project_box_simplex(v, 1.0);
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_LE(x.sum(), 1.0 + 1e-12);
    for (int s = 0; s < 20; ++s) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
      for (auto& e : y) e = std::abs(n(rng));
      if (y.sum() > 1.0) y /= y.sum();
      EXPECT_LE((x - v).norm(), (y - v).norm() + 1e-12);
    }
  }
}

bool non_decreasing(const ConvergenceTrace& t, bool gee_column) {
  for (std::size_t i = 1; i < t.entries.size(); ++i) {
    const double a = gee_column ? t.entries[i - 1].true_gee : t.entries[i - 1].true_objective;
    const double b = gee_column ? t.entries[i].true_gee : t.entries[i].true_objective;
    if (b < a) return false;
  }
  return true;
}

void check_gee_run(const DropFixture& f, double pmax, const PowerModel& model) {
  const OptimizationResult r = maximize_gee(f.gains, pmax, model, f.cfg.bandwidth_hz, f.cfg.optimizer);
  ASSERT_FALSE(r.trace.entries.empty());
  EXPECT_EQ(r.trace.entries.front().ap, -1);
  EXPECT_TRUE(non_decreasing(r.trace, true));
  EXPECT_TRUE(r.alloc.feasible(f.assoc, pmax));
  for (const TraceEntry& e : r.trace.entries) {
    for (std::size_t i = 1; i < e.lambda_history.size(); ++i)
      EXPECT_GE(e.lambda_history[i], e.lambda_history[i - 1]);
    if (e.ap >= 0)
      EXPECT_LE(std::abs(e.surrogate_at_anchor - e.sum_rate_at_anchor), 1e-9 * e.sum_rate_at_anchor);
  }
  const double uni = gee(f.gains, uniform_allocation(f.assoc, pmax), model, f.cfg.bandwidth_hz).gee_mbit_per_joule;
  const double opt = gee(f.gains, r.alloc, model, f.cfg.bandwidth_hz).gee_mbit_per_joule;
  EXPECT_GE(opt, uni);
  EXPECT_EQ(opt, r.trace.entries.back().true_gee);
  EXPECT_FALSE(r.trace.termination.empty());
  EXPECT_EQ(r.trace.final_gradient.rows(), f.cfg.num_aps);
  EXPECT_EQ(r.trace.final_gradient.cols(), f.cfg.num_ms);
}

TEST(MaximizeGee, MonotoneTraceAndBeatsUniform) {
  for (AccessMode mode : {AccessMode::UserCentric, AccessMode::CellFree}) {
    for (int d = 0; d < 3; ++d) {
      const DropFixture f = make_drop(desk_config(mode), d);
      for (double dbm : {-10.0, 10.0, 30.0}) check_gee_run(f, dbm_to_watts(dbm), make_power_model(f.cfg));
    }
  }
}

TEST(MaximizeGee, IdleAwareAtSmallBudget) {
  ScenarioConfig c = desk_config(AccessMode::UserCentric);
  c.power_model = PowerModelKind::IdleAware;
  const DropFixture f = make_drop(c, 0);
  check_gee_run(f, dbm_to_watts(-20.0), make_power_model(c));
}

TEST(MaximizeGee, WarmStartNeverHurts) {
  const DropFixture f = make_drop(desk_config(), 1);
  const PowerModel model = make_power_model(f.cfg);
  const auto low = maximize_gee(f.gains, dbm_to_watts(0.0), model, f.cfg.bandwidth_hz, f.cfg.optimizer);
  const double pmax = dbm_to_watts(5.0);
  const auto warm = maximize_gee(f.gains, pmax, model, f.cfg.bandwidth_hz, f.cfg.optimizer, &low.alloc);
  const double warm_gee = gee(f.gains, warm.alloc, model, f.cfg.bandwidth_hz).gee_mbit_per_joule;
  const double low_gee = gee(f.gains, low.alloc, model, f.cfg.bandwidth_hz).gee_mbit_per_joule;
  EXPECT_GE(warm_gee, low_gee);
}

TEST(MaximizeGee, SingleLinkMatchesGridSearch) {
  const ScenarioConfig c = single_user_config(1);
  const PowerModel model = make_power_model(c, PowerModelKind::Basic);
  for (int d = 0; d < 20; ++d) {
    const DropFixture f = make_drop(c, d);
    for (double pmax : {0.01, 1.0}) {
      const auto r = maximize_gee(f.gains, pmax, model, c.bandwidth_hz, c.optimizer);
      const double got = gee(f.gains, r.alloc, model, c.bandwidth_hz).gee_mbit_per_joule;
      PowerAllocation p = r.alloc;
      const auto best = testing::grid_maximize(
          [&](double x) {
            p.eta(0, 0) = x;
            return gee(f.gains, p, model, c.bandwidth_hz).gee_mbit_per_joule;
          },
          pmax, 10000);
      EXPECT_NEAR(got, best.value, 0.01 * best.value) << "drop " << d;
    }
  }
}

TEST(MaximizeAse, SingleLinkMatchesGridSearch) {
  const ScenarioConfig c = single_user_config(1);
  const PowerModel model = make_power_model(c, PowerModelKind::Basic);
  for (int d = 0; d < 20; ++d) {
    const DropFixture f = make_drop(c, d);
    const double pmax = 0.5;
    const auto r = maximize_ase(f.gains, pmax, model, c.bandwidth_hz, c.optimizer);
    const double got = gee(f.gains, r.alloc, model, c.bandwidth_hz).sum_ase_bit_s_hz;
    PowerAllocation p = r.alloc;
    const auto best = testing::grid_maximize(
        [&](double x) {
          p.eta(0, 0) = x;
          return gee(f.gains, p, model, c.bandwidth_hz).sum_ase_bit_s_hz;
        },
        pmax, 10000);
    EXPECT_NEAR(got, best.value, 0.01 * best.value) << "drop " << d;
  }
}

TEST(MaximizeAse, MonotoneTraceAndBeatsUniform) {
  for (AccessMode mode : {AccessMode::UserCentric, AccessMode::CellFree}) {
    const DropFixture f = make_drop(desk_config(mode), 2);
    const PowerModel model = make_power_model(f.cfg);
    const double pmax = dbm_to_watts(20.0);
    const auto r = maximize_ase(f.gains, pmax, model, f.cfg.bandwidth_hz, f.cfg.optimizer);
    EXPECT_TRUE(non_decreasing(r.trace, false));
    EXPECT_TRUE(r.alloc.feasible(f.assoc, pmax));
    const double uni = gee(f.gains, uniform_allocation(f.assoc, pmax), model, f.cfg.bandwidth_hz).sum_ase_bit_s_hz;
    EXPECT_GE(gee(f.gains, r.alloc, model, f.cfg.bandwidth_hz).sum_ase_bit_s_hz, uni);
    for (const TraceEntry& e : r.trace.entries) EXPECT_EQ(e.lambda, 0.0);
  }
}

TEST(MaximizeGee, NonFiniteGainsAbortWithTrace) {
  DropFixture f = make_drop(desk_config(), 0);
  f.gains.block(0, 0, f.assoc.servers[0].front())(0, 0) = cd(std::numeric_limits<double>::quiet_NaN(), 0.0);
  try {
    maximize_gee(f.gains, 0.1, make_power_model(f.cfg), f.cfg.bandwidth_hz, f.cfg.optimizer);
    FAIL() << "expected OptimizationError";
  } catch (const OptimizationError& e) {
    EXPECT_NE(std::string(e.what()).find("maximize"), std::string::npos);
    EXPECT_TRUE(e.trace().entries.empty());
  }
}

}  // namespace
}  // namespace cfsim
