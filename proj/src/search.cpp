#include "stsl/search.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

namespace stsl {
namespace {

std::vector<BlockKind> distinct_kinds(const std::vector<BlockKind>& vocabulary) {
  std::set<BlockKind> kinds(vocabulary.begin(), vocabulary.end());
  return {kinds.begin(), kinds.end()};
}

bool adds_prior_draw(const SlotSpec& spec, SlotPolicy policy) {
  return policy == SlotPolicy::defaults_plus_prior_draws && spec.default_prior.has_value() &&
         !std::holds_alternative<PriorDraw>(spec.default_value);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("enumeration count exceeds 64 bits");
  return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("enumeration count exceeds 64 bits");
  return r;
}

// Number of multisets of size k drawn from n items: C(n + k - 1, k).
std::uint64_t multichoose(std::uint64_t n, std::uint64_t k) {
  if (k == 0) return 1;
  if (n == 0) return 0;
  unsigned __int128 c = 1;
  for (std::uint64_t j = 1; j <= k; ++j) {
    c = c * (n - 1 + j) / j;  // C(n-1+j, j) from C(n-2+j, j-1), exact at every step
    if (c > UINT64_MAX) throw std::overflow_error("enumeration count exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(c);
}

using Entry = std::pair<std::string, BlockExpr>;
using ModelEntry = std::pair<std::string, ModelExpr>;

class Enumerator {
 public:
  Enumerator(const EnumBudget& budget, const FunctionRegistry& registry)
      : budget_(budget), kinds_(distinct_kinds(budget.vocabulary)), functions_(registry.names()) {}

  const std::vector<ModelEntry>& models(std::size_t depth) {
    if (const auto it = models_.find(depth); it != models_.end()) return it->second;
    const std::vector<Entry>& items = blocks(depth);
    std::vector<ModelEntry> out;
    std::vector<std::size_t> pick;
    // Nondecreasing index sequences over the sorted blocks.
    auto extend = [&](auto& self, std::size_t from) -> void {
      if (!pick.empty()) {
        ModelExpr m;
        std::string text;
        for (std::size_t i : pick) {
          if (!text.empty()) text += " + ";
          text += items[i].first;
          m.terms.push_back(items[i].second);
        }
        out.emplace_back(std::move(text), std::move(m));
      }
      if (pick.size() == budget_.max_terms) return;
      for (std::size_t i = from; i < items.size(); ++i) {
        pick.push_back(i);
        self(self, i);
        pick.pop_back();
      }
    };
    extend(extend, 0);
    return models_[depth] = std::move(out);
  }

 private:
  const std::vector<Entry>& blocks(std::size_t depth) {
    if (const auto it = blocks_.find(depth); it != blocks_.end()) return it->second;
    std::vector<Entry> out;
    for (BlockKind kind : kinds_) basic_blocks(kind, depth, out);
    if (budget_.allow_changepoints && depth > 0) {
      const auto& inner = models(depth - 1);
      for (const auto& [ltext, left] : inner) {
        for (const auto& [rtext, right] : inner) {
          if (!single_basic(left) && !single_basic(right)) continue;
          out.emplace_back("cp(" + ltext + ", " + rtext + ")", changepoint(left, right));
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    return blocks_[depth] = std::move(out);
  }

  static bool single_basic(const ModelExpr& m) {
    return m.terms.size() == 1 && std::holds_alternative<BasicBlock>(m.terms.front());
  }

  std::vector<std::optional<ParamValue>> slot_options(const SlotSpec& spec, std::size_t depth) {
    std::vector<std::optional<ParamValue>> opts;
    if (std::holds_alternative<std::monostate>(spec.default_value)) {
      if (spec.domain == SlotDomain::function_name) {
        for (const std::string& name : functions_) opts.emplace_back(NamedFunction{name});
      }
      return opts;
    }
    opts.emplace_back(std::nullopt);
    if (adds_prior_draw(spec, budget_.slot_policy)) opts.emplace_back(PriorDraw{});
    if (spec.composable && depth > 0) {
      for (const auto& [text, m] : models(depth - 1)) opts.emplace_back(submodel(m));
    }
    return opts;
  }

  void basic_blocks(BlockKind kind, std::size_t depth, std::vector<Entry>& out) {
    const BlockSchema& s = schema(kind);
    std::vector<std::vector<std::optional<ParamValue>>> per_slot;
    for (const SlotSpec& spec : s.slots) per_slot.push_back(slot_options(spec, depth));
    ParamMap params;
    auto fill = [&](auto& self, std::size_t i) -> void {
      if (i == per_slot.size()) {
        BlockExpr b = block(kind, params);
        std::string text = print_canonical(b);
        out.emplace_back(std::move(text), std::move(b));
        return;
      }
      for (const auto& opt : per_slot[i]) {
        if (opt) params.insert_or_assign(s.slots[i].name, *opt);
        self(self, i + 1);
        if (opt) params.erase(s.slots[i].name);
      }
    };
    fill(fill, 0);
  }

  const EnumBudget& budget_;
  std::vector<BlockKind> kinds_;
  std::vector<std::string> functions_;
  std::map<std::size_t, std::vector<Entry>> blocks_;
  std::map<std::size_t, std::vector<ModelEntry>> models_;
};

struct Counts {
  std::uint64_t basic = 0;   // single basic blocks
  std::uint64_t blocks = 0;  // basic + changepoint blocks
  std::uint64_t models = 0;  // sums of 1..max_terms blocks
};

Counts count_at(const EnumBudget& budget, const std::vector<BlockKind>& kinds, std::size_t function_count,
                std::size_t depth) {
  std::optional<Counts> inner;
  if (depth > 0) inner = count_at(budget, kinds, function_count, depth - 1);
  Counts c;
  for (BlockKind kind : kinds) {
    std::uint64_t product = 1;
    for (const SlotSpec& spec : schema(kind).slots) {
      std::uint64_t opts = 0;
      if (std::holds_alternative<std::monostate>(spec.default_value)) {
        opts = spec.domain == SlotDomain::function_name ? function_count : 0;
      } else {
        opts = 1;
        if (adds_prior_draw(spec, budget.slot_policy)) ++opts;
        if (spec.composable && inner) opts = checked_add(opts, inner->models);
      }
      product = checked_mul(product, opts);
    }
    c.basic = checked_add(c.basic, product);
  }
  c.blocks = c.basic;
  if (budget.allow_changepoints && inner) {
    // Ordered pairs of inner sentences with at least one single-basic side.
    const std::uint64_t rest = inner->models - inner->basic;
    c.blocks = checked_add(c.blocks, checked_mul(inner->models, inner->models) - checked_mul(rest, rest));
  }
  for (std::size_t k = 1; k <= budget.max_terms; ++k) c.models = checked_add(c.models, multichoose(c.blocks, k));
  return c;
}

}  // namespace

void check_budget(const EnumBudget& budget) {
  if (budget.vocabulary.empty()) throw std::invalid_argument("enumeration vocabulary is empty");
  if (budget.max_terms == 0) throw std::invalid_argument("max_terms must be >= 1");
}

bool shortlex_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<ModelExpr> enumerate(const EnumBudget& budget, const FunctionRegistry& registry) {
  check_budget(budget);
  Enumerator e(budget, registry);
  std::vector<ModelEntry> all = e.models(budget.max_depth);
  std::sort(all.begin(), all.end(), [](const ModelEntry& a, const ModelEntry& b) {
    return shortlex_less(a.first, b.first);
  });
  std::vector<ModelExpr> out;
  out.reserve(all.size());
  for (auto& [text, m] : all) out.push_back(std::move(m));
  return out;
}

std::vector<std::string> enumerate_canonical(const EnumBudget& budget, const FunctionRegistry& registry) {
  std::vector<std::string> out;
  for (const ModelExpr& m : enumerate(budget, registry)) out.push_back(print_canonical(m));
  return out;
}

std::uint64_t count(const EnumBudget& budget, const FunctionRegistry& registry) {
  check_budget(budget);
  return count_at(budget, distinct_kinds(budget.vocabulary), registry.names().size(), budget.max_depth).models;
}

}  // namespace stsl
