#pragma once

// Hand-rolled generators of valid model expressions for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stsl/ast.hpp"
#include "stsl/blocks.hpp"

namespace stsl::testing {

struct AstGenOptions {
  std::size_t max_depth = 3;
  std::size_t max_terms = 4;
  bool changepoints = true;
  // Keep values in ranges that sample without overflow and score with
  // strictly positive scales.
  bool sampleable = false;
};

class AstGenerator {
 public:
  AstGenerator(std::uint64_t seed, AstGenOptions opts) : rng_(seed), opts_(opts) {}

  ModelExpr model() { return model(opts_.max_depth); }

  ModelExpr model(std::size_t depth_left) {
    const std::size_t n = pick(1, opts_.max_terms);
    ModelExpr m;
    for (std::size_t i = 0; i < n; ++i) m.terms.push_back(term(depth_left));
    return m;
  }

 private:
  std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  BlockExpr term(std::size_t depth_left) {
    if (opts_.changepoints && depth_left > 0 && coin(0.15)) {
      ModelExpr single(basic(depth_left - 1));
      ModelExpr other = model(depth_left - 1);
      return coin() ? changepoint(std::move(single), std::move(other)) : changepoint(std::move(other), std::move(single));
    }
    return basic(depth_left);
  }

  // Awkward-but-valid doubles exercise shortest round-trip printing.
  double wild_real() {
    switch (pick(0, 5)) {
      case 0: return std::ldexp(uniform(-1.0, 1.0), static_cast<int>(pick(0, 120)) - 60);
      case 1: return static_cast<double>(static_cast<std::int64_t>(pick(0, 2000)) - 1000);
      case 2: return uniform(-1e6, 1e6);
      case 3: return -0.0;
      case 4: return 0.1 * static_cast<double>(pick(0, 50));
      default: return std::ldexp(uniform(0.5, 1.0), static_cast<int>(pick(0, 1000)) - 500);
    }
  }

  ParamValue literal_for(const SlotSpec& spec) {
    if (opts_.sampleable) {
      if (spec.requires_positive_trajectory) return Literal{uniform(0.1, 2.0)};
      if (spec.name == "beta") return Literal{uniform(-0.9, 0.9)};
      if (spec.domain == SlotDomain::at_least_one) return Literal{std::floor(uniform(1.0, 30.0))};
      if (spec.domain == SlotDomain::positive_integer) return Literal{static_cast<double>(pick(1, 5))};
      return Literal{uniform(-3.0, 3.0)};
    }
    switch (spec.domain) {
      case SlotDomain::nonnegative: return Literal{std::abs(wild_real())};
      case SlotDomain::at_least_one: return Literal{1.0 + std::abs(wild_real())};
      case SlotDomain::positive_integer: return Literal{static_cast<double>(pick(1, 1000))};
      default: return Literal{wild_real()};
    }
  }

  BlockExpr basic(std::size_t depth_left) {
    const BlockKind kind = kAllBlockKinds[pick(0, kAllBlockKinds.size() - 1)];
    const BlockSchema& s = schema(kind);
    ParamMap params;
    for (const SlotSpec& spec : s.slots) {
      if (spec.domain == SlotDomain::function_name) {
        const auto names = FunctionRegistry::builtin().names();
        params.emplace(spec.name, NamedFunction{names[pick(0, names.size() - 1)]});
        continue;
      }
      if (coin(0.4)) continue;  // leave at default
      const std::size_t choice = pick(0, 2);
      if (choice == 0) {
        params.emplace(spec.name, literal_for(spec));
      } else if (choice == 1 && spec.default_prior) {
        params.emplace(spec.name, PriorDraw{});
      } else if (spec.composable && depth_left > 0) {
        params.emplace(spec.name, submodel(sub_for(spec, depth_left - 1)));
      } else {
        params.emplace(spec.name, literal_for(spec));
      }
    }
    return block(kind, std::move(params));
  }

  ModelExpr sub_for(const SlotSpec& spec, std::size_t depth_left) {
    if (opts_.sampleable && spec.requires_positive_trajectory) {
      // Only grw keeps a scale strictly positive; keep its own scale small.
      return ModelExpr(block(BlockKind::grw, {{"scale", Literal{uniform(0.05, 0.3)}}}));
    }
    return model(depth_left);
  }

  std::mt19937_64 rng_;
  AstGenOptions opts_;
};

}  // namespace stsl::testing
