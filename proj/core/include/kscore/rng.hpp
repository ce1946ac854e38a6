// Copyright 2026 The kscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KSCORE_RNG_HPP
#define KSCORE_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace kscore {

/// Deterministic random stream. The variate recipes (canonical doubles,
/// Box-Muller normals, CDF-inversion discrete draws) are spelled out here
/// instead of delegating to std::*_distribution, whose output is
/// implementation-defined; equal seeds must reproduce equal streams on every
/// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double normal();

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    std::size_t i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Draws an index from normalized weights by CDF inversion.
  std::size_t discrete(std::span<const double> weights);

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// Mixes a base seed with a stream tag (splitmix64 finalizer) so concurrent
/// consumers own disjoint streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace kscore

#endif  // KSCORE_RNG_HPP
