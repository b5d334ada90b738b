#pragma once

#include <cstdint>
#include <vector>

namespace redress {

// Purpose tag keyed into every stream so that independent consumers of the
// same (seed, epoch, batch) never share a sequence.
enum class RngPurpose : std::uint64_t {
  kSplit = 1,
  kEvalNegatives,
  kTrainNegatives,
  kNeighborSample,
  kBatchShuffle,
  kParamInit,
  kDropout,
  kSynthetic,
  kGradCheck,
  kGeneric,
};

// Counter-style splitmix64 stream keyed by (seed, purpose, a, b). The key
// fully determines the sequence, so batch preparation is reproducible
// regardless of scheduling order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, RngPurpose purpose = RngPurpose::kGeneric,
                     std::uint64_t a = 0, std::uint64_t b = 0) {
    state_ = mix(seed + 0x9E3779B97F4A7C15ULL);
    state_ = mix(state_ ^ static_cast<std::uint64_t>(purpose));
    state_ = mix(state_ ^ a);
    state_ = mix(state_ ^ b);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 bits of entropy.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace redress
