#pragma once

#include <cstdint>
#include <random>

namespace infhs::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Steele, Lea, Flood). Used both as the substream
// generator step and as the key-mixing function.
inline std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Tiny counter-based generator for the parallel per-coordinate updates: the
// draw sequence depends only on the seed, never on thread scheduling.
struct SplitMix {
  std::uint64_t state;

  explicit SplitMix(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += kGolden;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Strictly inside (0, 1).
  double uniform() {
    return static_cast<double>((next() >> 11) + 0.5) * 0x1.0p-53;
  }
};

// Derives the seed of the (iteration, coordinate) substream from the master
// seed by chained avalanche mixing.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t iter,
                                    std::uint64_t j) {
  std::uint64_t h = mix64(master ^ 0x6A09E667F3BCC909ULL);
  h = mix64(h ^ iter);
  h = mix64(h ^ j);
  return h;
}

// Master engine for the serial parts of the samplers.
using Engine = std::mt19937_64;

inline double runif(Engine& e) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(e);
}

inline double rnorm(Engine& e) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(e);
}

inline double rgamma(Engine& e, double shape) {
  std::gamma_distribution<double> d(shape, 1.0);
  return d(e);
}

// InvGamma(shape, rate): reciprocal of a Gamma(shape, rate) variate.
inline double rinvgamma(Engine& e, double shape, double rate) {
  return rate / rgamma(e, shape);
}

}  // namespace infhs::rng
