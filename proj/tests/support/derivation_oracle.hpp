#pragma once

// Brute-force sentence enumeration written directly from the production rules
//   S -> Q | Q + S
//   Q -> f(p) | C(S, f(p)) | C(f(p), S)
//   p -> theta | S   (per slot)
// Derivations are generated as ordered sums, then quotiented by sorting every
// sum's terms and deduplicating on canonical text.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsl/ast.hpp"
#include "stsl/blocks.hpp"
#include "stsl/search.hpp"

namespace stsl::testing {

struct OracleTooLarge : std::runtime_error {
  OracleTooLarge() : std::runtime_error("oracle exceeded its size cap") {}
};

inline ModelExpr canonicalize(const ModelExpr& m);

inline BlockExpr canonicalize(const BlockExpr& b) {
  if (const auto* cp = std::get_if<ChangepointBlock>(&b)) return changepoint(canonicalize(*cp->left), canonicalize(*cp->right));
  BasicBlock out = std::get<BasicBlock>(b);
  for (auto& [name, value] : out.params) {
    if (const auto* sub = std::get_if<SubModel>(&value)) value = submodel(canonicalize(*sub->model));
  }
  return out;
}

inline ModelExpr canonicalize(const ModelExpr& m) {
  std::vector<std::pair<std::string, BlockExpr>> keyed;
  for (const BlockExpr& t : m.terms) {
    BlockExpr c = canonicalize(t);
    keyed.emplace_back(print_canonical(c), std::move(c));
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  ModelExpr out;
  for (auto& [text, t] : keyed) out.terms.push_back(std::move(t));
  return out;
}

class DerivationOracle {
 public:
  DerivationOracle(EnumBudget budget, std::size_t cap = 20000)
      : budget_(std::move(budget)), cap_(cap), functions_(FunctionRegistry::builtin().names()) {
    std::set<BlockKind> kinds(budget_.vocabulary.begin(), budget_.vocabulary.end());
    kinds_.assign(kinds.begin(), kinds.end());
  }

  /// Canonical texts of every derivable sentence; throws OracleTooLarge
  /// when an intermediate collection exceeds the cap.
  std::set<std::string> sentences() {
    std::set<std::string> out;
    for (const ModelExpr& m : derive_s(budget_.max_depth)) out.insert(print_canonical(m));
    return out;
  }

 private:
  void guard(std::size_t n) const {
    if (n > cap_) throw OracleTooLarge();
  }

  // All sentences of S at this depth budget, deduplicated after sorting.
  const std::vector<ModelExpr>& derive_s(std::size_t depth) {
    if (const auto it = s_cache_.find(depth); it != s_cache_.end()) return it->second;
    const std::vector<BlockExpr> qs = derive_q(depth);
    std::map<std::string, ModelExpr> unique;
    std::vector<ModelExpr> frontier;
    for (const BlockExpr& q : qs) frontier.push_back(ModelExpr(q));
    for (std::size_t len = 1; len <= budget_.max_terms; ++len) {
      std::vector<ModelExpr> next;
      for (const ModelExpr& m : frontier) {
        ModelExpr c = canonicalize(m);
        unique.emplace(print_canonical(c), c);
        guard(unique.size());
        if (len == budget_.max_terms) continue;
        for (const BlockExpr& q : qs) {  // S -> Q + S
          ModelExpr longer;
          longer.terms.push_back(q);
          longer.terms.insert(longer.terms.end(), m.terms.begin(), m.terms.end());
          next.push_back(std::move(longer));
          guard(next.size() / 8);
        }
      }
      frontier = std::move(next);
    }
    std::vector<ModelExpr> out;
    for (auto& [text, m] : unique) out.push_back(std::move(m));
    return s_cache_[depth] = std::move(out);
  }

  std::vector<BlockExpr> derive_fp(std::size_t depth) {
    std::vector<BlockExpr> out;
    for (BlockKind kind : kinds_) {
      const BlockSchema& s = schema(kind);
      std::vector<ParamMap> partial{ParamMap{}};
      for (const SlotSpec& spec : s.slots) {
        std::vector<std::optional<ParamValue>> choices;
        if (spec.domain == SlotDomain::function_name) {
          for (const auto& f : functions_) choices.emplace_back(NamedFunction{f});
        } else {
          choices.emplace_back(std::nullopt);
          if (budget_.slot_policy == SlotPolicy::defaults_plus_prior_draws && spec.default_prior &&
              !std::holds_alternative<PriorDraw>(spec.default_value)) {
            choices.emplace_back(PriorDraw{});
          }
          if (spec.composable && depth > 0) {
            for (const ModelExpr& m : derive_s(depth - 1)) choices.emplace_back(submodel(m));
          }
        }
        std::vector<ParamMap> grown;
        for (const ParamMap& p : partial) {
          for (const auto& c : choices) {
            ParamMap q = p;
            if (c) q.emplace(spec.name, *c);
            grown.push_back(std::move(q));
            guard(grown.size());
          }
        }
        partial = std::move(grown);
      }
      for (ParamMap& p : partial) out.push_back(block(kind, std::move(p)));
    }
    return out;
  }

  std::vector<BlockExpr> derive_q(std::size_t depth) {
    std::vector<BlockExpr> out = derive_fp(depth);
    if (budget_.allow_changepoints && depth > 0) {
      const auto& inner_s = derive_s(depth - 1);
      const auto inner_f = derive_fp(depth - 1);
      for (const ModelExpr& s : inner_s) {
        for (const BlockExpr& f : inner_f) {
          out.push_back(changepoint(s, ModelExpr(f)));  // C(S, f(p))
          out.push_back(changepoint(ModelExpr(f), s));  // C(f(p), S)
          guard(out.size());
        }
      }
    }
    return out;
  }

  EnumBudget budget_;
  std::size_t cap_;
  std::vector<std::string> functions_;
  std::vector<BlockKind> kinds_;
  std::map<std::size_t, std::vector<ModelExpr>> s_cache_;
};

}  // namespace stsl::testing
