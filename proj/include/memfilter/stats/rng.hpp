// Copyright 2026 The Memfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MEMFILTER_STATS_RNG_HPP_
#define MEMFILTER_STATS_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace memfilter::stats {

// SplitMix64 (Steele, Lea & Flood). Used to expand seeds and to derive
// independent stream seeds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256** 1.0. Output is fully specified by the seed, so results are
// identical across compilers and standard libraries.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  // Stream `index` of the family rooted at `seed`. Streams for distinct
  // indices are seeded through SplitMix64 and are treated as independent;
  // work item i always uses stream i, so serial and parallel runs agree.
  static Xoshiro256 stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 sm(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return Xoshiro256(sm.next());
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Xoshiro256& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Xoshiro256& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Uniform integer in [0, n) by rejection; unbiased.
inline std::uint64_t uniform_index(Xoshiro256& g, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

// Standard normal via Box-Muller; consumes two uniforms per call.
inline double standard_normal(Xoshiro256& g) {
  double u1 = uniform01(g);
  while (u1 <= 0.0) u1 = uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline bool bernoulli(Xoshiro256& g, double p) { return uniform01(g) < p; }

}  // namespace memfilter::stats

#endif  // MEMFILTER_STATS_RNG_HPP_
