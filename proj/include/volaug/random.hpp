// Copyright 2026 The volaug Authors
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

#ifndef VOLAUG_RANDOM_HPP
#define VOLAUG_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace volaug {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t state = x;
  return splitmix64(state);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/**
 * Counter-based stream derivation.
 *
 * Stream `k` of key `seed` is keyed by
 *
 *     mix64(seed ^ mix64(k + 0x632BE59BD9B4E019))
 *
 * where mix64 is the SplitMix64 output function applied to its argument.
 * Streams for distinct k are statistically independent, and stream k can be
 * reconstructed without touching streams 0..k-1.
 */
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t k) {
  return detail::mix64(seed ^ detail::mix64(k + 0x632BE59BD9B4E019ULL));
}

/**
 * Seeded xoshiro256** generator. Distributions are implemented here rather
 * than through <random> so sequences are identical across standard libraries.
 */
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t key) : key_(key) {
    std::uint64_t sm = key;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  /** Generator for stream k of `seed` (see stream_key). */
  static constexpr Rng stream(std::uint64_t seed, std::uint64_t k) { return Rng(stream_key(seed, k)); }

  constexpr std::uint64_t key() const { return key_; }

  /** Child generator derived from this generator's key; does not advance this one. */
  constexpr Rng split(std::uint64_t k) const { return stream(key_, k); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return next(); }

  constexpr std::uint64_t next() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /** Uniform on [0, 1) with 53 random bits. */
  constexpr double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /** Uniform on [lo, hi]; returns lo exactly when lo == hi. */
  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /** Standard normal via Box-Muller (one variate per call, no caching). */
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr bool coin() { return (next() >> 63) != 0; }

 private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace volaug

#endif  // VOLAUG_RANDOM_HPP
