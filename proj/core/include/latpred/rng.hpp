#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

// Deterministic randomness helpers.
//
// Everything downstream of a seed must reproduce byte-identically across
// platforms, so we use std::mt19937_64 (whose raw output sequence is fixed by
// the standard) and hand-rolled draw functions instead of the standard
// distributions, whose results are implementation-defined.

namespace latpred {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Decorrelates related seed values.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed. Distinct stream ids
// give streams that do not overlap in practice; the same (master, stream)
// pair always yields the same seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream ^ 0x632be59bd9b4e019ull));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  return derive_seed(derive_seed(master, a, b), c);
}

// Unbiased draw from [lo, hi], both ends inclusive. Rejection sampling on the
// raw 64-bit output, so the result depends only on the engine state.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) {  // whole 64-bit range requested
    return static_cast<std::int64_t>(rng());
  }
  const std::uint64_t reject_below = (0 - range) % range;
  std::uint64_t v = rng();
  while (v < reject_below) v = rng();
  return lo + static_cast<std::int64_t>(v % range);
}

// Uniform double in [0, 1) with 53 random mantissa bits.
inline double uniform_real01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_real01(rng);
}

// Standard normal via Box-Muller. Draws exactly two engine values per call;
// the second product of the transform is discarded to keep the draw count
// independent of call history.
inline double normal01(Rng& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform_real01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// In-place Fisher-Yates shuffle driven by uniform_int, so the permutation is
// platform-stable.
template <typename T>
void shuffle(Rng& rng, std::span<T> values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace latpred
