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

namespace cfsim {

/// Tuning knobs for the alternating GEE / ASE power-control loop.
struct OptimizerOptions {
  double tol_outer = 1e-4;     ///< relative improvement of a full sweep below which we stop
  int max_sweeps = 20;
  int sca_iters_per_ap = 5;
  double dinkelbach_tol = 1e-6;  ///< relative: |N - lambda D| <= tol * N
  int dinkelbach_max = 30;
  int pg_max_iters = 200;
  double pg_armijo_c = 1e-4;
  double pg_backtrack = 0.5;
  double pg_tol = 1e-9;        ///< PG stops when a step moves less than pg_tol * Pmax
  double sqrt_floor = 1e-12;   ///< watts; only used inside gradients
  bool warm_start = true;
};

}  // namespace cfsim
