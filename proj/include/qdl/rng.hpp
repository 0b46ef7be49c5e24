// SplitMix64: a counter-based generator. Output i of stream `seed` is
// mix(seed + (i + 1) * golden_gamma), so streams can be split by deriving
// child seeds with `split`.

#pragma once

#include <cstdint>

namespace qdl {

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Seed of an independent child stream, e.g. one per trial.
  static std::uint64_t split(std::uint64_t seed, std::uint64_t index) {
    return mix(seed ^ mix(index + kGamma));
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace qdl
