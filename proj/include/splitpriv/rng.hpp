// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace splitpriv {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random stream. All distribution transforms are explicit
/// inverse-CDF style maps from the raw 64-bit stream so that a given seed
/// produces the same values on every platform we build on.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int64_t uniform_int(int64_t n) {  // [0,n)
    return static_cast<int64_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Laplace(0,b) via inverse CDF of a symmetric uniform.
  double laplace(double b) {
    double u = uniform() - 0.5;  // (-0.5, 0.5)
    double a = 1.0 - 2.0 * std::abs(u);
    if (a <= 0.0) a = 0x1.0p-53;
    return (u < 0 ? b : -b) * std::log(a);
  }

  /// Derive an independent stream; tag picks the purpose (data, init, noise...).
  Rng fork(uint64_t tag) const { return Rng(splitmix64(seed_ ^ (0x51ed2701u + tag * 0x9e3779b97f4a7c15ULL))); }

  template <typename It>
  void shuffle(It first, It last) {
    auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      auto j = uniform_int(i + 1);
      std::swap(first[i], first[j]);
    }
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace splitpriv
