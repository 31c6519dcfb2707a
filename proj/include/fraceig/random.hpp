#pragma once

#include <cstdint>
#include <limits>

namespace fraceig {

/// SplitMix64 finalizer; a bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Small counter-style generator satisfying UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Hierarchical key for counter-based random streams.
///
/// A stream is identified by the run seed plus a path of tags such as
/// (purpose, mode, epoch). Each sample index then gets its own generator,
/// so draws do not depend on how work is split across threads.
class StreamKey {
 public:
  constexpr explicit StreamKey(std::uint64_t seed) : value_(mix64(seed)) {}

  [[nodiscard]] constexpr StreamKey child(std::uint64_t tag) const {
    StreamKey k(0);
    k.value_ = mix64(value_ ^ mix64(tag + 0x632be59bd9b4e019ULL));
    return k;
  }

  [[nodiscard]] SplitMix64 generator(std::uint64_t index) const {
    return SplitMix64(mix64(value_ + mix64(index)));
  }

  [[nodiscard]] constexpr std::uint64_t value() const { return value_; }

 private:
  std::uint64_t value_;
};

/// Stream purposes used as the first tag below a run seed.
enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kBatch = 2,
  kFinal = 3,
  kOverlap = 4,
  kValidation = 5,
  kRegionCheck = 6,
};

inline StreamKey stream(std::uint64_t seed, StreamPurpose purpose) {
  return StreamKey(seed).child(static_cast<std::uint64_t>(purpose));
}

/// Uniform double on the open interval (0, 1) with 53 random bits.
template <class Gen>
double uniform01(Gen& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace fraceig
