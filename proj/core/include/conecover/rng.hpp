#pragma once

#include <cstdint>

namespace conecover {

// Counter-based generator built on the splitmix64 finalizer. Any
// (seed, stream, counter) triple evaluates independently of history, which is
// what makes per-run / per-trial / per-site streams reproducible regardless
// of worker count or evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive(seed, stream)) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  // Uniform in [0, 1), 53 random bits.
  double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed + kGamma) ^ mix(stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  }

  // Stateless lookup: the index-th draw of a stream.
  static std::uint64_t at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return mix(derive(seed, stream) + (index + 1) * kGamma);
  }

  static double u01_from(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  // Signed site coordinate -> stream id (zig-zag).
  static std::uint64_t zigzag(std::int64_t z) {
    return (static_cast<std::uint64_t>(z) << 1) ^ static_cast<std::uint64_t>(z >> 63);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace conecover
