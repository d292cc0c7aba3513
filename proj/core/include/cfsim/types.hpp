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

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cfsim {

using cd = std::complex<double>;

/// Heap-backed complex matrix for antenna-domain quantities (N_AP x N_MS etc).
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Largest supported multiplexing order. Per-stream P x P blocks use inline
/// storage of this capacity so the optimizer's inner loops never allocate.
inline constexpr int kMaxStreams = 8;

using SmallMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxStreams, kMaxStreams>;

/// Base error for everything the simulator reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration document could not be parsed or violates an invariant.
/// `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class AccessMode { CellFree, UserCentric };
enum class PowerModelKind { Basic, IdleAware };
enum class ZfScope { Global, PerAp };
enum class Beamforming { FullyDigital, Hybrid };
enum class CsiKind { Perfect, Estimated };
enum class PowerAlgorithm { OptGee, OptAse, Uniform };

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace cfsim
