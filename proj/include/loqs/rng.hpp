// Copyright 2026 The loqs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

namespace loqs {

/// Deterministic, seedable, splittable pseudo-random generator (splitmix64).
///
/// Every stochastic operation in the library takes an Rng (or a raw seed) so
/// that runs are bit-reproducible: identical seed, identical stream.  Child
/// streams obtained from split() are statistically independent of the parent
/// and of each other, and splitting advances the parent exactly one step, so
/// sequential splits yield distinct children.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 bits of entropy.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Child generator for an independent stream.  Advances this generator.
  Rng split(std::uint64_t stream = 0) {
    return Rng(next_u64() ^ (stream * 0xda942042e4dd58b5ull + 0x2545f4914f6cdd1dull));
  }

 private:
  std::uint64_t state_;
};

}  // namespace loqs
