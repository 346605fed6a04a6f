#pragma once

#include <cstdint>

namespace closmcast {

// 64-bit finalizer (splitmix64 variant). Good avalanche, cheap, and the whole
// artifact's determinism story rests on it, so it is fixed here and never
// swapped for an implementation-defined std:: engine.
inline constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic stream/index seed derivation so that independent consumers
// (group generation, clustering restarts, simulation) never share state.
inline constexpr uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
  return mix64(master ^ mix64(stream ^ 0x632be59bd9b4e019ULL) ^ mix64(index ^ 0x9e6c63d0876a9a47ULL));
}

// splitmix64 sequence generator.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw from [0, n) by rejection.
  uint64_t bounded(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 bits of entropy.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

// Stream identifiers for derive_seed. Values are part of the reproducibility
// contract: changing them changes every experiment output.
namespace seed_stream {
inline constexpr uint64_t kGroupGen = 1;
inline constexpr uint64_t kKMeans = 2;
inline constexpr uint64_t kSim = 3;
inline constexpr uint64_t kEcmpSpine = 4;
inline constexpr uint64_t kEcmpCore = 5;
}  // namespace seed_stream

}  // namespace closmcast
