#pragma once

#include <cstdint>

namespace wprg {

/// Counter-based deterministic generator. Word i of a stream with seed s is
/// mix(s + (i+1) * 0x9e3779b97f4a7c15) where mix is the splitmix64 finalizer.
/// The mapping is pure, so instance corpora are reproducible across platforms
/// and bindings.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t word(uint64_t counter) const {
    return mix(seed_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  uint64_t next() { return word(counter_++); }

  /// Uniform value in [0, bound) via the multiply-shift trick; bound > 0.
  uint64_t below(uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Independent child stream, derived deterministically from this seed.
  CounterRng fork(uint64_t stream) const {
    return CounterRng(mix(seed_ ^ (0xd1b54a32d192ed03ULL + stream)));
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  uint64_t counter_ = 0;
};

}  // namespace wprg
