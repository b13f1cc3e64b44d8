#pragma once

#include <cstdint>

namespace resntk {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix_bits(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Identifies one reproducible random stream. The draw at position i is a pure
// function of (seed, stream, i), so streams can be consumed independently and
// in parallel without shared state.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  // Adjacent stream, used for draw-indexed Monte Carlo (stream-id = base + i).
  constexpr RngStream offset(std::uint64_t i) const {
    return {seed, stream + i};
  }

  // Well-separated child stream for an unrelated purpose.
  constexpr RngStream derived(std::uint64_t tag) const {
    return {seed,
            detail::mix_bits(stream ^ detail::mix_bits(tag + detail::kGolden))};
  }

  constexpr std::uint64_t key() const {
    return detail::mix_bits(detail::mix_bits(seed + detail::kGolden) ^
                            detail::mix_bits(stream ^ 0xD2B74407B1CE6E93ull));
  }
};

// Stateful consumer of one stream: counter mode over the SplitMix64 finalizer.
class RandomSequence {
 public:
  explicit RandomSequence(const RngStream& s) : key_(s.key()) {}

  std::uint64_t next_u64() {
    return detail::mix_bits(key_ + (++counter_) * detail::kGolden);
  }

  // Uniform on (0, 1].
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace resntk
