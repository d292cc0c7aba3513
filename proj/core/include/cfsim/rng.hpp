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
#include <random>

#include "cfsim/types.hpp"

namespace cfsim {

/// Separates independent random streams derived from one drop.
enum class StreamTag : std::uint64_t {
  Geometry = 1,
  Channel = 2,
  Pilot = 3,
  Noise = 4,
  Analog = 5,
};

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Returns the generator for (masterSeed, dropIndex, tag, substream). Every
/// random quantity in a drop comes from one of these keyed streams, so the
/// result does not depend on evaluation order or thread count.
Rng make_stream(std::uint64_t master_seed, std::uint64_t drop_index, StreamTag tag,
                std::uint64_t substream = 0);

/// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
cd complex_normal(Rng& rng, double variance = 1.0);

/// Zero-mean Laplacian with the given scale parameter.
double laplacian(Rng& rng, double scale);

}  // namespace cfsim
