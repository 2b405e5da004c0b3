#ifndef VERSTORE_RNG_HPP
#define VERSTORE_RNG_HPP

#include <cstdint>

namespace verstore {

// splitmix64 (Steele, Lea, Flood 2014). Chosen for dataset construction because
// the constants are fixed and trivially portable across languages, so a seed
// written down anywhere reproduces the same graph everywhere.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] (inclusive); hi >= lo.
  long long next_in(long long lo, long long hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<long long>(next() % span);
  }
};

}  // namespace verstore

#endif
