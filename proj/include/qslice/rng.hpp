#pragma once

#include <cstdint>
#include <limits>

namespace qslice {

/// SplitMix64: counter-based 64-bit generator. Cheap to construct, which
/// makes one independent substream per simulation round affordable.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

using Rng = SplitMix64;

/// Stream `index` derived from `seed`; distinct indices give unrelated streams.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
  return Rng(SplitMix64::mix(seed ^ SplitMix64::mix(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace qslice
