#include "stsl/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stsl {
namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

std::uint64_t join(std::uint32_t hi, std::uint32_t lo) { return (std::uint64_t{hi} << 32) | lo; }

// 53 high bits mapped to the midpoint of their cell, never 0 or 1.
double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMulA} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMulB} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeylA;
    k[1] += kWeylB;
  }
  return c;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

Philox4x32::Counter CounterRng::next_block() {
  const Philox4x32::Counter counter = {static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                                       static_cast<std::uint32_t>(stream_),
                                       static_cast<std::uint32_t>(stream_ >> 32)};
  ++index_;
  return Philox4x32::generate(counter, key_);
}

double CounterRng::uniform() {
  const auto b = next_block();
  return to_open_unit(join(b[0], b[1]));
}

double CounterRng::normal() {
  const auto b = next_block();
  const double u1 = to_open_unit(join(b[0], b[1]));
  const double u2 = to_open_unit(join(b[2], b[3]));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t CounterRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == UINT64_MAX) {
    const auto b = next_block();
    return static_cast<std::int64_t>(join(b[0], b[1]));
  }
  const std::uint64_t n = span + 1;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;  // accept v <= limit
  while (true) {
    const auto b = next_block();
    const std::uint64_t v = join(b[0], b[1]);
    if (v <= limit) return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + v % n);
  }
}

}  // namespace stsl
