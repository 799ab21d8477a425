#ifndef RELCOMP_RNG_H_
#define RELCOMP_RNG_H_

#include <cstdint>
#include <random>

namespace relcomp {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-seeds for every randomized step. Every random decision in
// the library is drawn from a generator seeded this way, so results are a
// pure function of (master seed, stream, index).
constexpr std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t index = 0) {
  return MixBits(MixBits(MixBits(master) ^ stream) + index);
}

enum SeedStream : std::uint64_t {
  kStreamSplit = 0x11,
  kStreamOracle = 0x12,
  kStreamBootstrap = 0x13,
  kStreamPool = 0x14,
  kStreamKMeans = 0x15,
  kStreamForest = 0x16,
  kStreamBaseline = 0x17,
  kStreamEvaluation = 0x18,
  kStreamLoop = 0x19,
};

inline std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double UniformUnit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace relcomp

#endif  // RELCOMP_RNG_H_
