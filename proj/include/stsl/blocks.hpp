#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stsl/ast.hpp"

namespace stsl {

enum class SlotDomain {
  real,              // any finite value
  nonnegative,       // literal >= 0; realized trajectories must be > 0
  at_least_one,      // real >= 1
  positive_integer,  // integer >= 1
  function_name,     // registered non-Markov function
};

enum class MarkovOrder { none, first, full_history };

struct PriorSpec {
  enum class Family { normal, lognormal, discrete_uniform };
  Family family = Family::normal;
  double loc = 0.0;
  double scale = 1.0;
  std::int64_t lo = 0;  // discrete_uniform support, inclusive
  std::int64_t hi = 0;
};

/// Required slots (monostate) have no default and must be bound.
using SlotDefault = std::variant<std::monostate, Literal, PriorDraw>;

struct SlotSpec {
  std::string name;
  SlotDefault default_value;
  SlotDomain domain = SlotDomain::real;
  bool composable = false;
  bool requires_positive_trajectory = false;
  std::optional<PriorSpec> default_prior;
};

struct BlockSchema {
  BlockKind kind = BlockKind::zero;
  std::vector<SlotSpec> slots;
  MarkovOrder markov_order = MarkovOrder::none;
  /// Index of the slot scaling the per-step normal noise; empty for
  /// deterministic blocks.
  std::optional<std::size_t> noise_scale_slot;

  std::optional<std::size_t> slot_index(std::string_view name) const;
  bool stochastic() const { return noise_scale_slot.has_value(); }
};

const BlockSchema& schema(BlockKind kind);

// Positional slot indices, in schema order.
namespace slot {
inline constexpr std::size_t rw_loc = 0, rw_scale = 1;
inline constexpr std::size_t grw_scale = 0;
inline constexpr std::size_t ar1_beta = 0, ar1_scale = 1, ar1_loc = 2;
inline constexpr std::size_t seasonal_period = 0, seasonal_amplitude = 1, seasonal_phase = 2;
inline constexpr std::size_t trend_a0 = 0, trend_a1 = 1;
inline constexpr std::size_t nonmarkov_fn = 0, nonmarkov_scale = 1, nonmarkov_lag = 2;
inline constexpr std::size_t noise_loc = 0, noise_scale = 1;
}  // namespace slot

/// F(history, t, s, noise). `history` holds f(1..t-1) within the window and
/// `t` is the 1-based index of the value being produced.
using NonMarkovFn =
    std::function<double(std::span<const double> history, std::int64_t t, std::int64_t lag, double noise)>;

class FunctionRegistry {
 public:
  FunctionRegistry() = default;

  /// Registry holding "optim-null" and "lagged-copy".
  static FunctionRegistry with_builtins();
  static const FunctionRegistry& builtin();

  /// Throws std::invalid_argument on a duplicate or malformed name.
  FunctionRegistry& register_fn(std::string name, NonMarkovFn fn);

  const NonMarkovFn* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, NonMarkovFn, std::less<>> fns_;
};

/// Built-in non-Markov functions.
double optim_null(std::span<const double> history, std::int64_t t, std::int64_t lag, double noise);
double lagged_copy(std::span<const double> history, std::int64_t t, std::int64_t lag, double noise);

class BlockDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Next latent value of a block. `history` is the block's own trajectory so
/// far in the window, `t` the absolute time, `slot_values` the per-slot values
/// at t (schema order), and `noise` the already scaled normal deviate.
double step(BlockKind kind, std::span<const double> history, std::int64_t t,
            std::span<const double> slot_values, double noise, const NonMarkovFn* fn = nullptr);

/// Inverts step for blocks whose value determines the noise (rw, grw, ar1,
/// noise). Empty for deterministic and non-Markov blocks.
std::optional<double> implied_noise(BlockKind kind, std::span<const double> history, std::int64_t t,
                                    std::span<const double> slot_values, double value);

}  // namespace stsl
