#pragma once

#include <array>
#include <cstdint>

namespace mradlab {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). The
// algorithm identity is part of the simulation contract: any implementation
// that reproduces the reference vectors in tests/test_philox.cpp reproduces
// every simulated record.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

inline Philox4x32::Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed),
          static_cast<std::uint32_t>(seed >> 32)};
}

// Uniform double in the open interval (0, 1). Uses the top 52 bits so that
// both ends stay exactly representable: min 2^-53, max 1 - 2^-53.
inline double unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Sequential draws from one stream: counter word 0 advances, words 1..3 name
// the stream.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint32_t stream1,
               std::uint32_t stream2 = 0, std::uint32_t stream3 = 0)
      : key_(key_from_seed(seed)), counter_{0, stream1, stream2, stream3} {}

  std::uint32_t next_u32() {
    if (used_ == 4) refill();
    return block_[used_++];
  }

  // Open (0, 1).
  double next_double() {
    const std::uint32_t hi = next_u32();
    return unit_open(hi, next_u32());
  }

  // Uniform integer in [0, bound) without modulo bias.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  void refill() {
    block_ = Philox4x32::generate(counter_, key_);
    ++counter_[0];
    used_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter block_{};
  int used_ = 4;
};

}  // namespace mradlab
