// Copyright 2026 The smdd-tr Authors
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

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace smdd {

/// Counter-based, splittable 64-bit generator.
///
/// Output i of a stream is `mix(key + i * golden)` (the SplitMix64 finalizer
/// applied to a Weyl sequence), so a stream is fully described by its key and
/// the number of values consumed. `split(id)` derives a statistically
/// independent child key; the parent is left untouched, which lets callers
/// pre-assign streams to work items and get identical results regardless of
/// evaluation order or threading.
///
/// Satisfies UniformRandomBitGenerator, so the <random> distributions work.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kSeedSalt)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + kGolden * ++counter_); }

  /// Child stream `stream_id`. Does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t stream_id) const {
    Rng child;
    child.key_ = mix(key_ ^ mix(stream_id + kSplitSalt));
    return child;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() { return std::normal_distribution<double>{}(*this); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  Rng() = default;

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x6a09e667f3bcc909ULL;
  static constexpr std::uint64_t kSplitSalt = 0xbb67ae8584caa73bULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace smdd
