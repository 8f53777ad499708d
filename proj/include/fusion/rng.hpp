#pragma once

#include <cstdint>
#include <random>

namespace fusion {

/// splitmix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Random stream used by samplers, tie-breaking coins and trials.
///
/// Streams for Monte Carlo trials are derived from (master seed, trial index)
/// directly, so any trial can be regenerated without replaying earlier ones.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  static Rng for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
    return Rng(mix64(master_seed) ^ mix64(~trial_index + 0x632BE59BD9B4E019ULL));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint8_t coin() { return static_cast<std::uint8_t>(engine_() >> 63); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fusion
