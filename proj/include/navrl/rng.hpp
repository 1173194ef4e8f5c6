#pragma once

#include <cstdint>
#include <random>

namespace navrl {

// All randomness in the library flows through one engine type so that a run
// is fully reproducible from its seed(s).
using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to derive well-separated stream seeds from a
// root seed plus a stream index (per worker, per frame, per episode slot...).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return mix64(mix64(root) ^ mix64(stream * 0x9e3779b97f4a7c15ull + 1));
}

inline Rng make_rng(std::uint64_t root, std::uint64_t stream = 0) {
  return Rng(derive_seed(root, stream));
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform index in [0, n). n must be > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Standard normal draw.
inline double normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace navrl
