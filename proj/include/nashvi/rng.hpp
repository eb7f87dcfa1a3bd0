// Copyright 2026 The nashvi Authors
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
#include <limits>
#include <span>

namespace nashvi {

/// SplitMix64 generator. Small state, cheap to construct, and trivially
/// splittable into independent substreams by hashing (seed, stream, index).
/// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  /// Independent generator for the `index`-th member of `stream` under `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Stream identifiers. Every consumer of randomness derived from a run seed
/// draws from its own stream so that the streams never overlap.
enum class Stream : std::uint64_t {
  kTrajectory = 1,
  kEstimatorCall = 2,
  kTau = 3,
  kSampling = 4,
};

inline Rng substream(std::uint64_t seed, Stream stream, std::uint64_t index) {
  return Rng::substream(seed, static_cast<std::uint64_t>(stream), index);
}

/// Inverse-CDF categorical draw. `probs` need not be normalized exactly; the
/// last index with positive mass absorbs rounding.
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

}  // namespace nashvi
