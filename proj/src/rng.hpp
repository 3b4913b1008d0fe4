#pragma once

#include <cmath>
#include <cstdint>

namespace lambdasim {

// splitmix64 finalizer (Steele/Lea/Flood; Vigna's public-domain constants).
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// Minimal splitmix64 stream. Streams for different (seed, counter) keys are
// created by scrambling the key, so Monte Carlo shots can be generated in any
// order and still be reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Exponential waiting time for a process of the given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::uint64_t state_;
};

// Counter-based stream for one Monte Carlo shot: key = (master_seed, index).
inline SplitMix64 shot_rng(std::uint64_t master_seed, std::uint64_t index) {
  return SplitMix64(mix64(master_seed + 0x9E3779B97F4A7C15ULL) ^
                    mix64(index + 0x8E9D5AAF98DD5AABULL));
}

}  // namespace lambdasim
