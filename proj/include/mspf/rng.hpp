#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mspf {

/// Which consumer a random stream belongs to. Distinct purposes never share
/// draws, so the simulator and the filter stay independent under one seed.
enum class StreamPurpose : std::uint32_t {
  Structure = 1,
  SimProcess = 2,
  SimMeasure = 3,
  Propagate = 4,
  Dirichlet = 5,
  Candidate = 6,
  Redraw = 7,
  Resample = 8,
  Test = 99,
};

struct StreamKey {
  std::uint64_t seed = 0;
  StreamPurpose purpose = StreamPurpose::Test;
  std::uint64_t individual = 0;
  std::uint64_t scale = 0;
  std::uint64_t particle = 0;
  std::uint64_t step = 0;
};

/// Stable 64-bit hash of a stream key (SplitMix64 finalizer chain).
std::uint64_t hash_stream_key(const StreamKey& key) noexcept;

/// Deterministic pseudo-random stream.  Identical keys give identical
/// sequences; the engine is SplitMix64 seeded with the key hash.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(const StreamKey& key) noexcept : state_(hash_stream_key(key)) {}
  explicit RngStream(std::uint64_t raw_state) noexcept : state_(raw_state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(*this);
  }

 private:
  std::uint64_t state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mspf
