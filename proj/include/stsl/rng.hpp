#pragma once

#include <array>
#include <cstdint>

namespace stsl {

/// Philox4x32-10 block function (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Counter-based generator: block i of stream s under seed k is
/// Philox(counter = (i, s), key = k), so any (seed, stream) is addressable
/// without advancing another stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  Philox4x32::Counter next_block();

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; one block per deviate.
  double normal();
  /// Uniform integer in [lo, hi], exact (rejection sampling on 64 bits).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::uint64_t blocks_used() const { return index_; }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
};

}  // namespace stsl
