#ifndef QFFGP_RNG_HPP
#define QFFGP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace qffgp {

/// Counter-based SplitMix64 stream. Draw k never depends on draw k-1, so the
/// same (seed, counter) pair gives the same value on every platform and the
/// stream can be consumed from multiple threads without shared state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed), counter_(0) {}

  std::uint64_t next_u64() { return at(counter_++); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Consumes two counter slots; the sibling
  /// value is discarded so draws stay counter-addressable.
  double next_normal() {
    double u1 = next_uniform();
    double u2 = next_uniform();
    // Guard the log: push u1 = 0 to the smallest representable uniform.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t at(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace qffgp

#endif  // QFFGP_RNG_HPP
