#include "stsl/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stsl {
namespace {

PriorSpec normal_prior() { return {PriorSpec::Family::normal, 0.0, 1.0, 0, 0}; }
PriorSpec lognormal_prior() { return {PriorSpec::Family::lognormal, 0.0, 1.0, 0, 0}; }

SlotSpec loc_slot(std::string name = "loc", double def = 0.0) {
  return {std::move(name), Literal{def}, SlotDomain::real, true, false, normal_prior()};
}

SlotSpec scale_slot() {
  return {"scale", Literal{1.0}, SlotDomain::nonnegative, true, true, lognormal_prior()};
}

SlotSpec coefficient_slot(std::string name) {
  return {std::move(name), PriorDraw{}, SlotDomain::real, false, false, normal_prior()};
}

std::vector<BlockSchema> build_schemas() {
  std::vector<BlockSchema> out;
  out.push_back({BlockKind::rw, {loc_slot(), scale_slot()}, MarkovOrder::first, slot::rw_scale});
  out.push_back({BlockKind::grw, {scale_slot()}, MarkovOrder::first, slot::grw_scale});
  out.push_back({BlockKind::ar1,
                 {coefficient_slot("beta"), scale_slot(), loc_slot()},
                 MarkovOrder::first,
                 slot::ar1_scale});
  out.push_back({BlockKind::seasonal,
                 {{"period", PriorDraw{}, SlotDomain::at_least_one, false, false,
                   PriorSpec{PriorSpec::Family::discrete_uniform, 0.0, 1.0, 2, 24}},
                  loc_slot("amplitude", 1.0),
                  {"phase", Literal{0.0}, SlotDomain::real, false, false, normal_prior()}},
                 MarkovOrder::none,
                 std::nullopt});
  out.push_back({BlockKind::trend,
                 {coefficient_slot("a0"), coefficient_slot("a1")},
                 MarkovOrder::none,
                 std::nullopt});
  out.push_back({BlockKind::zero, {}, MarkovOrder::none, std::nullopt});
  out.push_back({BlockKind::nonmarkov,
                 {{"fn", std::monostate{}, SlotDomain::function_name, false, false, std::nullopt},
                  scale_slot(),
                  {"s", Literal{1.0}, SlotDomain::positive_integer, false, false, std::nullopt}},
                 MarkovOrder::full_history,
                 slot::nonmarkov_scale});
  out.push_back({BlockKind::noise, {loc_slot(), scale_slot()}, MarkovOrder::none, slot::noise_scale});
  return out;
}

double previous(std::span<const double> history) { return history.empty() ? 0.0 : history.back(); }

double previous_log(std::span<const double> history) {
  if (history.empty()) return 0.0;
  if (!(history.back() > 0.0)) throw BlockDomainError("grw history must be strictly positive");
  return std::log(history.back());
}

}  // namespace

std::optional<std::size_t> BlockSchema::slot_index(std::string_view name) const {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].name == name) return i;
  }
  return std::nullopt;
}

const BlockSchema& schema(BlockKind kind) {
  static const std::vector<BlockSchema> schemas = build_schemas();
  return schemas[static_cast<std::size_t>(kind)];
}

double optim_null(std::span<const double> history, std::int64_t, std::int64_t, double noise) {
  if (history.empty()) return noise;
  const double running_max = *std::max_element(history.begin(), history.end());
  std::vector<double> sorted(history.begin(), history.end());
  // Lower median, as torch.median reports for even lengths.
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  return std::max(running_max, *mid + noise);
}

double lagged_copy(std::span<const double> history, std::int64_t t, std::int64_t lag, double noise) {
  if (history.empty()) return noise;
  const std::int64_t index = std::max<std::int64_t>(t - lag, 1);  // 1-based, clamped to earliest
  return history[static_cast<std::size_t>(index - 1)] + noise;
}

FunctionRegistry FunctionRegistry::with_builtins() {
  FunctionRegistry reg;
  reg.register_fn("optim-null", optim_null);
  reg.register_fn("lagged-copy", lagged_copy);
  return reg;
}

const FunctionRegistry& FunctionRegistry::builtin() {
  static const FunctionRegistry reg = with_builtins();
  return reg;
}

FunctionRegistry& FunctionRegistry::register_fn(std::string name, NonMarkovFn fn) {
  const bool well_formed =
      !name.empty() && name[0] >= 'a' && name[0] <= 'z' &&
      std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
      });
  if (!well_formed) throw std::invalid_argument("invalid function name '" + name + "'");
  if (!fn) throw std::invalid_argument("empty function for '" + name + "'");
  if (fns_.contains(name)) throw std::invalid_argument("function '" + name + "' is already registered");
  fns_.emplace(std::move(name), std::move(fn));
  return *this;
}

const NonMarkovFn* FunctionRegistry::find(std::string_view name) const {
  const auto it = fns_.find(name);
  return it == fns_.end() ? nullptr : &it->second;
}

std::vector<std::string> FunctionRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, fn] : fns_) out.push_back(name);
  return out;
}

double step(BlockKind kind, std::span<const double> history, std::int64_t t,
            std::span<const double> slot_values, double noise, const NonMarkovFn* fn) {
  const BlockSchema& s = schema(kind);
  if (slot_values.size() != s.slots.size()) throw std::invalid_argument("slot value count mismatch");
  if (s.noise_scale_slot && slot_values[*s.noise_scale_slot] < 0.0) {
    throw BlockDomainError("negative scale");
  }
  switch (kind) {
    case BlockKind::rw:
      return previous(history) + slot_values[slot::rw_loc] + noise;
    case BlockKind::grw:
      return std::exp(previous_log(history) + noise);
    case BlockKind::ar1:
      return slot_values[slot::ar1_loc] + slot_values[slot::ar1_beta] * previous(history) + noise;
    case BlockKind::seasonal: {
      const double period = slot_values[slot::seasonal_period];
      if (!(period >= 1.0)) throw BlockDomainError("seasonal period must be >= 1");
      const double angle = 2.0 * std::numbers::pi * (static_cast<double>(t) + slot_values[slot::seasonal_phase]) / period;
      return slot_values[slot::seasonal_amplitude] * std::cos(angle);
    }
    case BlockKind::trend:
      return slot_values[slot::trend_a0] + slot_values[slot::trend_a1] * static_cast<double>(t);
    case BlockKind::zero:
      return 0.0;
    case BlockKind::nonmarkov: {
      if (fn == nullptr) throw std::invalid_argument("nonmarkov step needs a function");
      const double lag = slot_values[slot::nonmarkov_lag];
      if (!(lag >= 1.0) || lag != std::floor(lag)) throw BlockDomainError("nonmarkov lag must be an integer >= 1");
      const auto index = static_cast<std::int64_t>(history.size()) + 1;
      return (*fn)(history, index, static_cast<std::int64_t>(lag), noise);
    }
    case BlockKind::noise:
      return slot_values[slot::noise_loc] + noise;
  }
  throw std::logic_error("unknown block kind");
}

std::optional<double> implied_noise(BlockKind kind, std::span<const double> history, std::int64_t,
                                    std::span<const double> slot_values, double value) {
  switch (kind) {
    case BlockKind::rw:
      return value - previous(history) - slot_values[slot::rw_loc];
    case BlockKind::grw:
      if (!(value > 0.0)) throw BlockDomainError("grw value must be strictly positive");
      return std::log(value) - previous_log(history);
    case BlockKind::ar1:
      return value - slot_values[slot::ar1_loc] - slot_values[slot::ar1_beta] * previous(history);
    case BlockKind::noise:
      return value - slot_values[slot::noise_loc];
    default:
      return std::nullopt;
  }
}

}  // namespace stsl
