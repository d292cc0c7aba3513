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

#include "cfsim/rng.hpp"

#include <cmath>

namespace cfsim {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t master_seed, std::uint64_t drop_index, StreamTag tag,
                std::uint64_t substream) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ drop_index);
  h = mix64(h ^ static_cast<std::uint64_t>(tag));
  h = mix64(h ^ substream);
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(drop_index), static_cast<std::uint32_t>(substream)};
  return Rng(seq);
}

cd complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

double laplacian(Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double v = u(rng);
  const double s = v < 0 ? -1.0 : 1.0;
  return -scale * s * std::log1p(-2.0 * std::abs(v));
}

}  // namespace cfsim
