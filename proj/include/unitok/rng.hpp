#pragma once

#include <cstdint>
#include <random>

// Seeded randomness helpers. All stochastic operations take a caller-owned
// engine; nothing in the library reads entropy on its own. Uniform variates
// are produced from raw engine output (not std distributions) so that a
// fixed seed yields identical streams on every platform.

namespace unitok {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 42;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Child seed for word `word_index` on line `line_index`. Depends only on
// these three values, so parallel corpus tokenization reproduces the
// sequential stream word for word.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t line_index,
                                 std::uint64_t word_index) {
  return mix64(mix64(mix64(master) ^ line_index) ^ word_index);
}

// Uniform double in [0, 1) with 53 random bits: exactly m * 2^-53.
inline double unit_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection from the top of the 64-bit range;
// unbiased and engine-order deterministic.
inline std::uint64_t bounded_u64(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

}  // namespace unitok
