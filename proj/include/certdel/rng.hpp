#pragma once

#include <cstddef>
#include <cstdint>

namespace certdel {

// Counter-splittable deterministic generator (splitmix64 core).
//
// fork(stream) derives an independent substream from the *construction seed*
// and the stream id only, never from draws already taken. Per-round and
// per-trial substreams are therefore reproducible regardless of execution
// order, which is what makes Monte Carlo loops safe to parallelize.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n). Requires n >= 1.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t reject_below = (0 - span) % span;  // 2^64 mod n
    std::uint64_t v = next_u64();
    while (v < reject_below) v = next_u64();
    return static_cast<std::size_t>(v % span);
  }

  std::uint64_t seed() const { return seed_; }

  // Independent substream identified by (construction seed, stream).
  Rng fork(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace certdel
