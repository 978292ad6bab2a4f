#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stsl {

class FunctionRegistry;

/// The closed set of generative block kinds (terminal f).
enum class BlockKind { rw, grw, ar1, seasonal, trend, zero, nonmarkov, noise };

inline constexpr std::array<BlockKind, 8> kAllBlockKinds = {
    BlockKind::rw,    BlockKind::grw,  BlockKind::ar1,       BlockKind::seasonal,
    BlockKind::trend, BlockKind::zero, BlockKind::nonmarkov, BlockKind::noise};

std::string_view to_string(BlockKind kind);
std::optional<BlockKind> block_kind_from_name(std::string_view name);

struct ModelExpr;

struct Literal {
  double value = 0.0;
  friend bool operator==(const Literal&, const Literal&) = default;
};

/// "?" in the DSL: draw the slot once per trace from its default prior.
struct PriorDraw {
  friend bool operator==(const PriorDraw&, const PriorDraw&) = default;
};

struct SubModel {
  std::shared_ptr<const ModelExpr> model;
  bool operator==(const SubModel& other) const;
};

/// Name of a registered non-Markov update function.
struct NamedFunction {
  std::string name;
  friend bool operator==(const NamedFunction&, const NamedFunction&) = default;
};

using ParamValue = std::variant<Literal, PriorDraw, SubModel, NamedFunction>;
using ParamMap = std::map<std::string, ParamValue, std::less<>>;

struct BasicBlock {
  BlockKind kind = BlockKind::zero;
  ParamMap params;
  friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

/// C(left, right): left's prefix up to t*-1 concatenated with right's suffix.
struct ChangepointBlock {
  std::shared_ptr<const ModelExpr> left;
  std::shared_ptr<const ModelExpr> right;
  bool operator==(const ChangepointBlock& other) const;
};

using BlockExpr = std::variant<BasicBlock, ChangepointBlock>;

/// A sentence of the grammar: a flat, ordered, nonempty sum of blocks.
struct ModelExpr {
  std::vector<BlockExpr> terms;

  ModelExpr() = default;
  ModelExpr(BlockExpr term) { terms.push_back(std::move(term)); }  // NOLINT
  explicit ModelExpr(std::vector<BlockExpr> ts) : terms(std::move(ts)) {}

  friend bool operator==(const ModelExpr&, const ModelExpr&) = default;
};

// Construction helpers.
BlockExpr block(BlockKind kind, ParamMap params = {});
BlockExpr changepoint(ModelExpr left, ModelExpr right);
ParamValue submodel(ModelExpr model);
inline ParamValue literal(double value) { return Literal{value}; }
inline ParamValue prior_draw() { return PriorDraw{}; }
inline ParamValue function_ref(std::string name) { return NamedFunction{std::move(name)}; }

/// Flat concatenation of two sums.
ModelExpr operator+(ModelExpr lhs, const ModelExpr& rhs);

// Block paths address nodes from the root: root term i is "i"; term k of the
// sub-model in slot s of block p is "p/s/k"; changepoint branches use the
// slot names "left" and "right".
std::string term_path(std::string_view parent, std::string_view slot, std::size_t index);

struct Violation {
  std::string path;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks derivability under the block schemas. Never throws; an empty
/// result means the expression is a valid sentence.
std::vector<Violation> validate(const ModelExpr& expr);
std::vector<Violation> validate(const ModelExpr& expr, const FunctionRegistry& registry);

std::string print_canonical(const ModelExpr& expr);
std::string print_canonical(const BlockExpr& term);

/// 0 without nesting, else 1 + the deepest sub-model or changepoint branch.
std::size_t depth(const ModelExpr& expr);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace stsl
