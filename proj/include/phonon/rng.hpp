#ifndef PHONON_RNG_HPP
#define PHONON_RNG_HPP

#include <cmath>
#include <cstdint>
#include <utility>

#include "phonon/common.hpp"

namespace phonon {

// Counter-based generator: every draw is a pure function of
// (seed, stream..., counter), so ensembles are reproducible and can be
// partitioned across workers without shared state.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t a = 0,
                             std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t k = mix64(seed ^ 0x853c49e6748fea9bull);
  k = mix64(k + a);
  k = mix64(k + b);
  k = mix64(k + c);
  return k;
}

inline std::uint64_t rng_bits(std::uint64_t key, std::uint64_t counter) {
  return mix64(key ^ mix64(counter + 0xda942042e4dd58b5ull));
}

/// Uniform in [0,1).
inline double rng_uniform(std::uint64_t key, std::uint64_t counter) {
  return static_cast<double>(rng_bits(key, counter) >> 11) * 0x1.0p-53;
}

/// Pair of independent standard normals (Box-Muller), consuming
/// counters 2*counter and 2*counter+1.
inline std::pair<double, double> rng_gauss_pair(std::uint64_t key,
                                                std::uint64_t counter) {
  double u1 = 1.0 - rng_uniform(key, 2 * counter);      // (0,1]
  double u2 = rng_uniform(key, 2 * counter + 1);
  double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2)};
}

}  // namespace phonon

#endif
