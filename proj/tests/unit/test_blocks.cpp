#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stsl/blocks.hpp"

using namespace stsl;

namespace {

std::vector<double> slots(std::initializer_list<double> v) { return std::vector<double>(v); }

}  // namespace

TEST_CASE("schemas") {
  const auto& rw = schema(BlockKind::rw);
  REQUIRE(rw.slots.size() == 2);
  CHECK(rw.slots[slot::rw_loc].name == "loc");
  CHECK(rw.slots[slot::rw_scale].name == "scale");
  CHECK(rw.markov_order == MarkovOrder::first);
  CHECK(rw.stochastic());
  CHECK(*rw.noise_scale_slot == slot::rw_scale);

  CHECK(schema(BlockKind::zero).slots.empty());
  CHECK_FALSE(schema(BlockKind::zero).stochastic());
  CHECK_FALSE(schema(BlockKind::trend).stochastic());
  CHECK_FALSE(schema(BlockKind::seasonal).stochastic());
  CHECK(schema(BlockKind::nonmarkov).markov_order == MarkovOrder::full_history);

  for (BlockKind k : kAllBlockKinds) {
    const auto& s = schema(k);
    CHECK(s.kind == k);
    for (std::size_t i = 0; i < s.slots.size(); ++i) {
      CHECK(s.slot_index(s.slots[i].name) == i);
      if (s.slots[i].name == "scale") {
        CHECK(s.slots[i].composable);
        CHECK(s.slots[i].requires_positive_trajectory);
        REQUIRE(s.slots[i].default_prior);
        CHECK(s.slots[i].default_prior->family == PriorSpec::Family::lognormal);
      }
      if (std::holds_alternative<PriorDraw>(s.slots[i].default_value)) CHECK(s.slots[i].default_prior.has_value());
    }
    CHECK_FALSE(s.slot_index("nope").has_value());
  }
  CHECK(std::holds_alternative<std::monostate>(schema(BlockKind::nonmarkov).slots[slot::nonmarkov_fn].default_value));
}

TEST_CASE("step examples") {
  CHECK(step(BlockKind::trend, {}, 3, slots({1, 2}), 0.0) == 7.0);
  CHECK(std::abs(step(BlockKind::seasonal, {}, 1, slots({4, 1, 0}), 0.0)) < 1e-12);
  const std::vector<double> prev{2.0};
  CHECK(step(BlockKind::ar1, prev, 5, slots({0.5, 1, 0}), 0.1) == doctest::Approx(1.1).epsilon(1e-15));
  const auto& fn = *FunctionRegistry::builtin().find("optim-null");
  const std::vector<double> h{1, 3, 2};
  CHECK(step(BlockKind::nonmarkov, h, 10, slots({0, 1, 1}), -0.5, &fn) == 3.0);
  CHECK(optim_null(h, 4, 1, 1.5) == 3.5);
  CHECK(optim_null({}, 1, 1, -0.25) == -0.25);
  CHECK(step(BlockKind::zero, {}, 42, {}, 0.0) == 0.0);
  CHECK(step(BlockKind::noise, {}, 0, slots({3, 1}), 0.5) == 3.5);
  CHECK(step(BlockKind::rw, prev, 0, slots({0.25, 1}), 0.5) == 2.75);
  CHECK(step(BlockKind::rw, {}, 0, slots({0.25, 1}), 0.5) == 0.75);
  CHECK(step(BlockKind::grw, {}, 0, slots({1}), 0.0) == 1.0);
  CHECK(step(BlockKind::grw, prev, 0, slots({1}), std::log(3.0)) == doctest::Approx(6.0));
}

TEST_CASE("lagged copy looks back s steps, clamped to the first value") {
  const std::vector<double> h{10, 20, 30};
  CHECK(lagged_copy(h, 4, 1, 0.0) == 30);
  CHECK(lagged_copy(h, 4, 3, 0.5) == 10.5);
  CHECK(lagged_copy(h, 4, 9, 0.0) == 10);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(step(BlockKind::rw, {}, 0, slots({0, -1}), 0.0), BlockDomainError);
  CHECK_THROWS_AS(step(BlockKind::seasonal, {}, 0, slots({0.5, 1, 0}), 0.0), BlockDomainError);
  const auto& fn = *FunctionRegistry::builtin().find("lagged-copy");
  CHECK_THROWS_AS(step(BlockKind::nonmarkov, {}, 0, slots({0, 1, 0}), 0.0, &fn), BlockDomainError);
  CHECK_THROWS_AS(step(BlockKind::nonmarkov, {}, 0, slots({0, 1, 1}), 0.0, nullptr), std::invalid_argument);
}

TEST_CASE("function registry") {
  auto reg = FunctionRegistry::with_builtins();
  CHECK(reg.names() == std::vector<std::string>{"lagged-copy", "optim-null"});
  CHECK_THROWS_AS(reg.register_fn("optim-null", optim_null), std::invalid_argument);
  CHECK_THROWS_AS(reg.register_fn("Bad Name", optim_null), std::invalid_argument);
  CHECK_THROWS_AS(reg.register_fn("", optim_null), std::invalid_argument);
  reg.register_fn("mean-revert", [](std::span<const double> h, std::int64_t, std::int64_t, double e) {
    return (h.empty() ? 0.0 : 0.5 * h.back()) + e;
  });
  REQUIRE(reg.find("mean-revert") != nullptr);
  CHECK((*reg.find("mean-revert"))(std::vector<double>{4.0}, 2, 1, 1.0) == 3.0);
  CHECK(FunctionRegistry::builtin().find("mean-revert") == nullptr);
  CHECK(FunctionRegistry().find("optim-null") == nullptr);
}

TEST_CASE("property: rw equals ar1 with beta=1 and matching loc") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 200; ++trial) {
    const double loc = n01(gen), scale = std::abs(n01(gen)) + 0.1;
    std::vector<double> a, b;
    for (std::int64_t t = 0; t < 50; ++t) {
      const double e = scale * n01(gen);
      a.push_back(step(BlockKind::rw, a, t, slots({loc, scale}), e));
      b.push_back(step(BlockKind::ar1, b, t, slots({1.0, scale, loc}), e));
    }
    CHECK(a == b);
  }
}

TEST_CASE("property: seasonal repeats with its period") {
  for (double period : {2.0, 3.0, 7.0, 12.0, 30.0, 4.5}) {
    for (double phase : {0.0, 0.3, -2.0}) {
      for (std::int64_t t = -20; t < 60; ++t) {
        const auto s = slots({period, 1.7, phase});
        const double here = step(BlockKind::seasonal, {}, t, s, 0.0);
        if (period == std::floor(period)) {
          CHECK(std::abs(step(BlockKind::seasonal, {}, t + static_cast<std::int64_t>(period), s, 0.0) - here) < 1e-9);
        }
        CHECK(here == doctest::Approx(1.7 * std::cos(2 * std::numbers::pi * (t + phase) / period)));
      }
    }
  }
}

TEST_CASE("property: grw stays positive") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n01;
  std::vector<double> x;
  for (std::int64_t t = 0; t < 5000; ++t) {
    x.push_back(step(BlockKind::grw, x, t, slots({0.5}), 0.5 * n01(gen)));
    REQUIRE(x.back() > 0.0);
  }
}

TEST_CASE("property: step is pure") {
  const std::vector<double> h{0.5, -1.0, 2.0};
  const auto& fn = *FunctionRegistry::builtin().find("optim-null");
  for (BlockKind k : kAllBlockKinds) {
    std::vector<double> s;
    for (const auto& spec : schema(k).slots) s.push_back(spec.domain == SlotDomain::at_least_one ? 5.0 : 1.0);
    const NonMarkovFn* f = k == BlockKind::nonmarkov ? &fn : nullptr;
    const double a = step(k, h, 9, s, 0.3, f);
    const double b = step(k, h, 9, s, 0.3, f);
    CHECK(a == b);
  }
}

TEST_CASE("implied noise inverts step") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n01;
  for (BlockKind k : {BlockKind::rw, BlockKind::grw, BlockKind::ar1, BlockKind::noise}) {
    std::vector<double> s;
    for (const auto& spec : schema(k).slots) s.push_back(spec.name == "beta" ? 0.7 : 0.8);
    std::vector<double> h;
    for (std::int64_t t = 0; t < 30; ++t) {
      const double e = 0.8 * n01(gen);
      const double v = step(k, h, t, s, e);
      const auto back = implied_noise(k, h, t, s, v);
      REQUIRE(back.has_value());
      CHECK(*back == doctest::Approx(e).epsilon(1e-12));
      h.push_back(v);
    }
  }
  CHECK_FALSE(implied_noise(BlockKind::trend, {}, 0, slots({0, 0}), 0.0).has_value());
  CHECK_FALSE(implied_noise(BlockKind::nonmarkov, {}, 0, slots({0, 1, 1}), 0.0).has_value());
  CHECK_THROWS_AS(implied_noise(BlockKind::grw, {}, 0, slots({1}), -1.0), BlockDomainError);
}
