#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace qbayes {

/// Counter-based 64-bit generator (SplitMix64 finalizer over a keyed counter).
///
/// Every value is a pure function of (key, counter), so independent streams
/// are obtained by deriving keys rather than by sharing state. Streams are
/// split with `Rng::stream(seed, {trial, module, purpose, ...})`; the derived
/// key is a hash chain over the seed and the index tuple, so the same tuple
/// always names the same stream on every run and thread count.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_(mix(key ^ kStreamSalt)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's nearly-divisionless rejection.
    __uint128_t m = static_cast<__uint128_t>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (one value per call, platform independent).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Child stream derived from this stream's key and an index tuple.
  Rng split(std::initializer_list<std::uint64_t> ids) const {
    Rng child;
    std::uint64_t k = key_;
    for (auto id : ids) k = mix(k ^ mix(id + kGolden));
    child.key_ = k;
    return child;
  }

  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    return Rng(seed).split(ids);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Purpose tags for stream splitting; values are part of the reproducibility contract.
namespace stream_id {
inline constexpr std::uint64_t kEvidence = 1;
inline constexpr std::uint64_t kHerald = 2;
inline constexpr std::uint64_t kEstimation = 3;
inline constexpr std::uint64_t kMoment = 4;
inline constexpr std::uint64_t kUtility = 5;
inline constexpr std::uint64_t kGradient = 6;
inline constexpr std::uint64_t kRepcode = 7;
inline constexpr std::uint64_t kFiltering = 8;
inline constexpr std::uint64_t kPrior = 9;
inline constexpr std::uint64_t kBaseline = 10;
}  // namespace stream_id

}  // namespace qbayes
