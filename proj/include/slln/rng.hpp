#pragma once

// Counter-based random words: word(seed, stream, counter) is a pure
// function, so any path can be regenerated independently of how paths are
// distributed over threads. The mixer is the SplitMix64 finalizer applied
// to a per-stream key advanced by a Weyl increment.

#include <cstdint>

namespace slln {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t word(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_ = 0;
};

/// Sequential view over one (seed, stream) pair.
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

  std::uint64_t next_word() { return rng_.word(counter_++); }
  double next_uniform() { return rng_.uniform(counter_++); }
  std::uint64_t counter() const { return counter_; }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace slln
