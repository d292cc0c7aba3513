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

#include <string>
#include <vector>

#include "cfsim/options.hpp"
#include "cfsim/rate.hpp"

namespace cfsim {

/// One accepted step of the alternating loop. `ap == -1` marks the starting point.
struct TraceEntry {
  int sweep = 0;
  int ap = -1;
  double true_gee = 0.0;        ///< Mbit/J, evaluated on the gains being optimized
  double true_objective = 0.0;  ///< GEE (Mbit/J) or sum-ASE (bit/s/Hz), whichever is maximized
  double surrogate = 0.0;       ///< surrogate numerator at the accepted point, bit/s
  double lambda = 0.0;          ///< final Dinkelbach parameter, bit/J (0 for ASE runs)
  double surrogate_at_anchor = 0.0;
  double sum_rate_at_anchor = 0.0;  ///< sum_k R_k at the linearization point, bit/s
  std::vector<double> lambda_history;
};

struct ConvergenceTrace {
  std::vector<TraceEntry> entries;
  std::string termination;
  int sweeps = 0;
  /// d objective / d eta_{m,k} at the returned point (M x K, zero off-support).
  /// Exposed for stationarity inspection only.
  Eigen::MatrixXd final_gradient;
};

/// Raised when the objective turns non-finite; carries the trace so far.
class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& what, ConvergenceTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const ConvergenceTrace& trace() const noexcept { return trace_; }

 private:
  ConvergenceTrace trace_;
};

struct OptimizationResult {
  PowerAllocation alloc;
  ConvergenceTrace trace;
};

/// eta_{m,k} = Pmax / |K(m)| on the association, zero elsewhere.
PowerAllocation uniform_allocation(const Association& assoc, double p_max);

struct GSplit {
  double g1 = 0.0;  ///< B log2 det(sigma^2 L^H L + sum_l A_{k,l} A_{k,l}^H)
  double g2 = 0.0;  ///< same without l = k
};

GSplit g_split_eval(const GainTensor& g, const PowerAllocation& p, int k, double bandwidth_hz);

/// d g2_k / d eta_{m,l} for l in K(m) (in that order), bit/s per watt.
Eigen::VectorXd grad_g2_wrt_ap(const GainTensor& g, const PowerAllocation& p, int m, int k,
                               double bandwidth_hz, double sqrt_floor = 1e-12);

/// d g1_k / d eta_{m,l} for l in K(m), same conventions.
Eigen::VectorXd grad_g1_wrt_ap(const GainTensor& g, const PowerAllocation& p, int m, int k,
                               double bandwidth_hz, double sqrt_floor = 1e-12);

/// g1_k(eta) - g2_k(eta0) - grad g2_k(eta0) . (eta_m - eta0_m); eta and eta0 may
/// differ only in row m.
double surrogate_rate(const GainTensor& g, const PowerAllocation& eta, const PowerAllocation& eta0,
                      int m, int k, double bandwidth_hz, double sqrt_floor = 1e-12);

/// Euclidean projection onto {x >= 0, sum x <= p_max}.
Eigen::VectorXd project_box_simplex(const Eigen::VectorXd& v, double p_max);

/// Alternating per-AP maximization of the GEE. Starts from the better of the
/// uniform allocation and `warm` (if given and opts.warm_start), and only
/// accepts steps that do not decrease the true GEE.
OptimizationResult maximize_gee(const GainTensor& g, double p_max, const PowerModel& model,
                                double bandwidth_hz, const OptimizerOptions& opts,
                                const PowerAllocation* warm = nullptr);

/// Same machinery for the sum rate (unit denominator, no Dinkelbach loop).
/// `model` is only used to fill the GEE column of the trace.
OptimizationResult maximize_ase(const GainTensor& g, double p_max, const PowerModel& model,
                                double bandwidth_hz, const OptimizerOptions& opts,
                                const PowerAllocation* warm = nullptr);

}  // namespace cfsim
