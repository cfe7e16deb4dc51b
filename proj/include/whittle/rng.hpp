// Copyright 2026 The whittle-sched Authors
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

namespace whittle {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. Draw k of the stream is a pure function of
/// (key, k), so a client's draw for slot t can be fetched directly with
/// at(t) and two runs that consume the stream differently still see the same
/// numbers. Also usable as a sequential UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream() = default;
  RandomStream(std::uint64_t key_hi, std::uint64_t key_lo) noexcept : hi_(key_hi), lo_(key_lo) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix64(hi_ ^ mix64(lo_ + counter * 0x9e3779b97f4a7c15ULL));
  }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_at(std::uint64_t counter) const noexcept {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }

  result_type operator()() noexcept { return at(counter_++); }
  double uniform() noexcept { return uniform_at(counter_++); }
  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t position() const noexcept { return counter_; }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::uint64_t hi_ = 0;
  std::uint64_t lo_ = 0;
  std::uint64_t counter_ = 0;
};

/// Stream for one (replication, client) pair. Client indices at or above
/// kPolicyStreamBase are reserved for policy-internal randomness.
RandomStream spawn_rng(std::uint64_t master_seed, std::uint64_t replication_index,
                       std::uint64_t client_index) noexcept;

inline constexpr std::uint64_t kPolicyStreamBase = 1ULL << 40;

}  // namespace whittle
