#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stsl/ast.hpp"
#include "stsl/blocks.hpp"

namespace stsl {

enum class SlotPolicy { defaults_only, defaults_plus_prior_draws };

/// Bounds for enumerating sentences: which blocks, how many terms per sum,
/// how deep sub-models and changepoints may nest.
struct EnumBudget {
  std::vector<BlockKind> vocabulary;
  std::size_t max_terms = 1;
  std::size_t max_depth = 0;
  bool allow_changepoints = false;
  SlotPolicy slot_policy = SlotPolicy::defaults_only;
};

/// Throws std::invalid_argument for an empty vocabulary or max_terms == 0.
void check_budget(const EnumBudget& budget);

/// Every valid sentence within the budget, once each, in shortlex order of
/// canonical text. Sums list their terms in nondecreasing canonical order, so
/// reorderings of one sum are a single sentence. Slots are left at their
/// defaults, optionally bound to "?", and composable slots additionally take
/// every sentence of the next lower depth.
std::vector<ModelExpr> enumerate(const EnumBudget& budget,
                                 const FunctionRegistry& registry = FunctionRegistry::builtin());

std::vector<std::string> enumerate_canonical(const EnumBudget& budget,
                                             const FunctionRegistry& registry = FunctionRegistry::builtin());

/// Size of enumerate(budget), computed combinatorially. Throws
/// std::overflow_error past 2^64 - 1.
std::uint64_t count(const EnumBudget& budget, const FunctionRegistry& registry = FunctionRegistry::builtin());

/// Strict weak order used for emission: shorter text first, then bytewise.
bool shortlex_less(const std::string& a, const std::string& b);

}  // namespace stsl
