#pragma once

#include "dppla/matrix.hpp"

#include <cstdint>
#include <random>

namespace dppla {

/// Engine used by every seed-taking entry point.
using Rng = std::mt19937_64;

/// Per-draw seed for batch loops: a splitmix64 mix of (seed, index), so
/// draw i is the same no matter how the loop is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

template <class URBG>
double uniform01(URBG& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

template <class URBG>
bool bernoulli(URBG& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

/// Index drawn proportionally to nonnegative `weights` with the given total.
/// Returns -1 if every weight is zero.
template <class URBG>
Index draw_categorical(URBG& rng, const Vector& weights, double total) {
  if (!(total > 0.0)) return -1;
  double u = uniform01(rng) * total;
  Index last_positive = -1;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    last_positive = i;
    if (u < weights(i)) return i;
    u -= weights(i);
  }
  return last_positive;  // rounding spill-over
}

/// Uniform k-subset of {0..n-1} without replacement (partial Fisher-Yates).
template <class URBG>
std::vector<Index> uniform_subset(URBG& rng, Index n, Index k) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace dppla
