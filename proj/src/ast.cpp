#include "stsl/ast.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

#include "stsl/blocks.hpp"

namespace stsl {
namespace {

constexpr std::array<std::string_view, 8> kKindNames = {"rw",    "grw",  "ar1",       "seasonal",
                                                        "trend", "zero", "nonmarkov", "noise"};

const ModelExpr& deref(const std::shared_ptr<const ModelExpr>& p) {
  static const ModelExpr empty;
  return p ? *p : empty;
}

bool same_model(const std::shared_ptr<const ModelExpr>& a, const std::shared_ptr<const ModelExpr>& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool single_basic(const ModelExpr& m) {
  return m.terms.size() == 1 && std::holds_alternative<BasicBlock>(m.terms.front());
}

class Validator {
 public:
  explicit Validator(const FunctionRegistry& registry) : registry_(registry) {}

  void model(const ModelExpr& m, std::string_view parent, std::string_view slot) {
    if (m.terms.empty()) {
      report(std::string(parent), "empty sum: a model needs at least one block");
      return;
    }
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
      const std::string path = term_path(parent, slot, i);
      std::visit([&](const auto& b) { term(b, path); }, m.terms[i]);
    }
  }

  std::vector<Violation> take() { return std::move(out_); }

 private:
  void report(std::string path, std::string message) { out_.push_back({std::move(path), std::move(message)}); }

  void term(const ChangepointBlock& cp, const std::string& path) {
    if (!cp.left || !cp.right) {
      report(path, "changepoint is missing a branch");
      return;
    }
    if (!single_basic(*cp.left) && !single_basic(*cp.right)) {
      report(path, "changepoint requires one single-block side");
    }
    model(*cp.left, path, "left");
    model(*cp.right, path, "right");
  }

  void term(const BasicBlock& b, const std::string& path) {
    const BlockSchema& s = schema(b.kind);
    for (const auto& [name, value] : b.params) {
      const auto index = s.slot_index(name);
      if (!index) {
        report(path, "unknown parameter '" + name + "' for " + std::string(to_string(b.kind)));
        continue;
      }
      slot_value(s.slots[*index], value, path);
    }
    for (const SlotSpec& spec : s.slots) {
      if (std::holds_alternative<std::monostate>(spec.default_value) && !b.params.contains(spec.name)) {
        report(path, "missing required parameter '" + spec.name + "' for " + std::string(to_string(b.kind)));
      }
    }
  }

  void slot_value(const SlotSpec& spec, const ParamValue& value, const std::string& path) {
    const std::string where = "parameter '" + spec.name + "'";
    if (spec.domain == SlotDomain::function_name) {
      const auto* fn = std::get_if<NamedFunction>(&value);
      if (fn == nullptr) {
        report(path, where + " must name a registered function");
      } else if (registry_.find(fn->name) == nullptr) {
        report(path, "unknown function '" + fn->name + "'");
      }
      return;
    }
    if (const auto* lit = std::get_if<Literal>(&value)) {
      if (auto msg = literal_problem(spec.domain, lit->value)) report(path, where + " " + *msg);
    } else if (std::holds_alternative<PriorDraw>(value)) {
      if (!spec.default_prior) report(path, where + " has no default prior; '?' is not allowed");
    } else if (const auto* sub = std::get_if<SubModel>(&value)) {
      if (!spec.composable) {
        report(path, where + " is not composable; a sub-model is not allowed");
      } else if (!sub->model) {
        report(path, where + " holds an empty sub-model");
      } else {
        model(*sub->model, path, spec.name);
      }
    } else {
      report(path, where + " does not accept a function name");
    }
  }

  static std::optional<std::string> literal_problem(SlotDomain domain, double v) {
    if (!std::isfinite(v)) return "must be finite";
    switch (domain) {
      case SlotDomain::real:
        return std::nullopt;
      case SlotDomain::nonnegative:
        if (v < 0.0) return "must be >= 0";
        return std::nullopt;
      case SlotDomain::at_least_one:
        if (v < 1.0) return "must be >= 1";
        return std::nullopt;
      case SlotDomain::positive_integer:
        if (v < 1.0 || v != std::floor(v)) return "must be an integer >= 1";
        return std::nullopt;
      case SlotDomain::function_name:
        return "must name a function";
    }
    return std::nullopt;
  }

  const FunctionRegistry& registry_;
  std::vector<Violation> out_;
};

void print_model(const ModelExpr& m, std::string& out);

void print_value(const ParamValue& value, std::string& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += format_number(v.value);
        } else if constexpr (std::is_same_v<T, PriorDraw>) {
          out += '?';
        } else if constexpr (std::is_same_v<T, SubModel>) {
          print_model(deref(v.model), out);
        } else {
          out += v.name;
        }
      },
      value);
}

void print_term(const BlockExpr& term, std::string& out) {
  if (const auto* cp = std::get_if<ChangepointBlock>(&term)) {
    out += "cp(";
    print_model(deref(cp->left), out);
    out += ", ";
    print_model(deref(cp->right), out);
    out += ')';
    return;
  }
  const auto& b = std::get<BasicBlock>(term);
  out += to_string(b.kind);
  out += '(';
  bool first = true;
  auto emit = [&](const std::string& name, const ParamValue& value) {
    if (!first) out += ", ";
    first = false;
    out += name;
    out += '=';
    print_value(value, out);
  };
  const BlockSchema& s = schema(b.kind);
  for (const SlotSpec& spec : s.slots) {
    if (const auto it = b.params.find(spec.name); it != b.params.end()) emit(it->first, it->second);
  }
  for (const auto& [name, value] : b.params) {
    if (!s.slot_index(name)) emit(name, value);
  }
  out += ')';
}

void print_model(const ModelExpr& m, std::string& out) {
  for (std::size_t i = 0; i < m.terms.size(); ++i) {
    if (i > 0) out += " + ";
    print_term(m.terms[i], out);
  }
}

}  // namespace

std::string_view to_string(BlockKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<BlockKind> block_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return kAllBlockKinds[i];
  }
  return std::nullopt;
}

bool SubModel::operator==(const SubModel& other) const { return same_model(model, other.model); }

bool ChangepointBlock::operator==(const ChangepointBlock& other) const {
  return same_model(left, other.left) && same_model(right, other.right);
}

BlockExpr block(BlockKind kind, ParamMap params) { return BasicBlock{kind, std::move(params)}; }

BlockExpr changepoint(ModelExpr left, ModelExpr right) {
  return ChangepointBlock{std::make_shared<const ModelExpr>(std::move(left)),
                          std::make_shared<const ModelExpr>(std::move(right))};
}

ParamValue submodel(ModelExpr model) { return SubModel{std::make_shared<const ModelExpr>(std::move(model))}; }

ModelExpr operator+(ModelExpr lhs, const ModelExpr& rhs) {
  lhs.terms.insert(lhs.terms.end(), rhs.terms.begin(), rhs.terms.end());
  return lhs;
}

std::string term_path(std::string_view parent, std::string_view slot, std::size_t index) {
  std::string out;
  if (!parent.empty()) {
    out.append(parent);
    out += '/';
    out.append(slot);
    out += '/';
  }
  out += std::to_string(index);
  return out;
}

std::vector<Violation> validate(const ModelExpr& expr) { return validate(expr, FunctionRegistry::builtin()); }

std::vector<Violation> validate(const ModelExpr& expr, const FunctionRegistry& registry) {
  Validator v(registry);
  v.model(expr, "", "");
  return v.take();
}

std::string print_canonical(const ModelExpr& expr) {
  std::string out;
  print_model(expr, out);
  return out;
}

std::string print_canonical(const BlockExpr& term) {
  std::string out;
  print_term(term, out);
  return out;
}

std::size_t depth(const ModelExpr& expr) {
  std::size_t deepest = 0;
  bool nested = false;
  auto visit_child = [&](const std::shared_ptr<const ModelExpr>& child) {
    nested = true;
    deepest = std::max(deepest, depth(deref(child)));
  };
  for (const BlockExpr& term : expr.terms) {
    if (const auto* cp = std::get_if<ChangepointBlock>(&term)) {
      visit_child(cp->left);
      visit_child(cp->right);
      continue;
    }
    for (const auto& [name, value] : std::get<BasicBlock>(term).params) {
      if (const auto* sub = std::get_if<SubModel>(&value)) visit_child(sub->model);
    }
  }
  return nested ? deepest + 1 : 0;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

}  // namespace stsl
