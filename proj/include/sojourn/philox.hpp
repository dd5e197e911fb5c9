#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sojourn::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Counter philox4x32(Counter ctr, Key key);

// UniformRandomBitGenerator over one Philox stream. Word 0 of the counter is
// the draw index; words 1..3 name the stream, so any stream can be replayed
// without touching the others.
class PhiloxEngine {
 public:
  using result_type = std::uint32_t;

  PhiloxEngine(std::uint64_t seed, std::uint32_t s1, std::uint32_t s2, std::uint32_t s3);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  Counter ctr_;
  Key key_;
  Counter block_{};
  unsigned used_ = 4;
};

}  // namespace sojourn::rng
