// Copyright 2026 The Coreaug Authors.
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

#ifndef COREAUG_RNG_HPP_
#define COREAUG_RNG_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace coreaug {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a tuple of counters (seed, round, row, ...) into one stream key, so
// every consumer derives its randomness from its own coordinates rather than
// from shared generator state.
inline std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// Purpose tags keep streams for different consumers disjoint.
enum class Stream : std::uint64_t {
  kInit = 1,
  kAugment = 2,
  kSelection = 3,
  kBatches = 4,
  kLabelNoise = 5,
  kRandomFraction = 6,
  kLipschitz = 7,
  kData = 8,
  kMonteCarlo = 9,
};

// mt19937_64 is fully specified by the standard; the distributions are not,
// so the conversions below are written out to stay bit-identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : engine_(key) {}
  Rng(Stream stream, std::initializer_list<std::uint64_t> parts)
      : engine_(mix(stream, parts)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n).
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  // Box-Muller; one value per call, the sine branch is discarded.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  // k distinct values from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + index(n - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  static std::uint64_t mix(Stream stream,
                           std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = stream_key({static_cast<std::uint64_t>(stream)});
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
  }

  std::mt19937_64 engine_;
};

}  // namespace coreaug

#endif  // COREAUG_RNG_HPP_
