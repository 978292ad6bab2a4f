#include "stsl/density.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace stsl {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool close(double actual, double expected) {
  if (!std::isfinite(actual) || !std::isfinite(expected)) return false;
  return std::abs(actual - expected) <= kConsistencyTolerance * std::max(1.0, std::abs(expected));
}

struct ResolvedSlot {
  double constant = 0.0;
  std::optional<std::vector<double>> series;

  double at(std::size_t i) const { return series ? (*series)[i] : constant; }
};

class Scorer {
 public:
  Scorer(TimeWindow window, const Trace& trace, const FunctionRegistry& registry)
      : window_(window), trace_(trace), registry_(registry) {
    for (const NoiseDraw& d : trace.noises) noise_by_address_.emplace(d.address, &d);
  }

  void run(const ModelExpr& model) {
    if (trace_.window != window_) violation("y", std::nullopt, "trace window differs from the scoring window");
    if (window_.length() < 1) {
      violation("y", std::nullopt, "empty time window");
      return;
    }
    const auto sum = model_series(model, "", "");
    if (trace_.observed.size() != length()) {
      violation("y", std::nullopt, "observed series has length " + std::to_string(trace_.observed.size()) +
                                       ", expected " + std::to_string(length()));
      return;
    }
    if (!sum) return;
    for (std::size_t k = 0; k < length(); ++k) {
      if (!close(trace_.observed[k], (*sum)[k])) {
        violation("y", time(k), "observed value differs from the sum of the model's terms");
      }
    }
  }

  std::vector<ConsistencyViolation> violations;
  std::vector<std::string> scale_errors;
  LogDensityReport report;

 private:
  std::size_t length() const { return static_cast<std::size_t>(window_.length()); }
  std::int64_t time(std::size_t k) const { return window_.t0 + static_cast<std::int64_t>(k); }

  void violation(std::string path, std::optional<std::int64_t> t, std::string message) {
    violations.push_back({std::move(path), t, std::move(message)});
  }

  const std::vector<double>* latent(const std::string& path) {
    const auto it = trace_.latents.find(path);
    if (it == trace_.latents.end()) {
      violation(path, std::nullopt, "missing latent series");
      return nullptr;
    }
    if (it->second.size() != length()) {
      violation(path, std::nullopt, "latent series has the wrong length");
      return nullptr;
    }
    return &it->second;
  }

  std::optional<std::vector<double>> model_series(const ModelExpr& m, const std::string& parent,
                                                  std::string_view slot) {
    std::vector<const std::vector<double>*> parts;
    bool complete = true;
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
      const std::string path = term_path(parent, slot, i);
      const std::vector<double>* values = std::visit([&](const auto& b) { return term(b, path); }, m.terms[i]);
      complete = complete && values != nullptr;
      parts.push_back(values);
    }
    if (!complete) return std::nullopt;
    return sum_series(parts, length());
  }

  const std::vector<double>* term(const ChangepointBlock& cp, const std::string& path) {
    const auto left = model_series(*cp.left, path, "left");
    const auto right = model_series(*cp.right, path, "right");
    const std::int64_t n = window_.length();
    if (n < 3) {
      violation(path, std::nullopt, "changepoint needs a window of at least 3 steps");
      return nullptr;
    }
    const auto it = trace_.changepoints.find(path);
    if (it == trace_.changepoints.end()) {
      violation(path, std::nullopt, "missing changepoint index");
      return nullptr;
    }
    const std::int64_t t_star = it->second;
    if (t_star < 2 || t_star > n - 1) {
      violation(path, std::nullopt, "changepoint index " + std::to_string(t_star) + " outside {2, ..., T-1}");
      return nullptr;
    }
    report.per_changepoint[path] = -std::log(static_cast<double>(n - 2));
    const std::vector<double>* own = latent(path);
    if (own == nullptr || !left || !right) return nullptr;
    const auto expected = splice(*left, *right, t_star);
    bool replayed = true;
    for (std::size_t k = 0; k < length(); ++k) {
      if (!close((*own)[k], expected[k])) {
        violation(path, time(k), "changepoint value differs from its branches");
        replayed = false;
      }
    }
    return replayed ? own : nullptr;
  }

  const std::vector<double>* term(const BasicBlock& b, const std::string& path) {
    const BlockSchema& s = schema(b.kind);
    const std::size_t n_slots = s.slots.size();
    std::vector<ResolvedSlot> slots(n_slots);
    const NonMarkovFn* fn = nullptr;
    bool ok = true;

    for (std::size_t i = 0; i < n_slots; ++i) {
      const SlotSpec& spec = s.slots[i];
      const auto bound = b.params.find(spec.name);
      const ParamValue* v = bound == b.params.end() ? nullptr : &bound->second;
      const bool drawn = v != nullptr ? std::holds_alternative<PriorDraw>(*v)
                                      : std::holds_alternative<PriorDraw>(spec.default_value);
      if (drawn) {
        const auto g = trace_.globals.find({path, spec.name});
        if (g == trace_.globals.end()) {
          violation(path, std::nullopt, "missing global draw for '" + spec.name + "'");
          ok = false;
          continue;
        }
        const double lp = prior_log_pdf(*spec.default_prior, g->second);
        if (!std::isfinite(lp)) {
          violation(path, std::nullopt, "global '" + spec.name + "' lies outside its prior support");
          ok = false;
        }
        report.per_global[{path, spec.name}] = lp;
        slots[i].constant = g->second;
      } else if (v == nullptr) {
        if (const auto* lit = std::get_if<Literal>(&spec.default_value)) slots[i].constant = lit->value;
      } else if (const auto* lit = std::get_if<Literal>(v)) {
        slots[i].constant = lit->value;
      } else if (const auto* named = std::get_if<NamedFunction>(v)) {
        fn = registry_.find(named->name);
        slots[i].constant = std::numeric_limits<double>::quiet_NaN();
      } else if (const auto* sub = std::get_if<SubModel>(v)) {
        slots[i].series = model_series(*sub->model, path, spec.name);
        if (!slots[i].series) ok = false;
      }
    }

    // Scales must be strictly positive everywhere.
    for (std::size_t i = 0; i < n_slots && ok; ++i) {
      if (!s.slots[i].requires_positive_trajectory) continue;
      for (std::size_t k = 0; k < length(); ++k) {
        if (!(slots[i].at(k) > 0.0)) {
          scale_errors.push_back(path + ": non-positive " + s.slots[i].name + " " + format_number(slots[i].at(k)) +
                                 " at t=" + std::to_string(time(k)));
          ok = false;
          break;
        }
      }
    }

    const std::vector<double>* values = latent(path);
    if (values == nullptr || !ok) return nullptr;
    const std::size_t violations_before = violations.size();

    double block_log_pdf = 0.0;
    std::vector<double> at_t(n_slots);
    const std::span<const double> all(*values);
    for (std::size_t k = 0; k < length(); ++k) {
      const std::int64_t t = time(k);
      for (std::size_t i = 0; i < n_slots; ++i) at_t[i] = slots[i].at(k);
      const auto history = all.first(k);
      try {
        if (!s.noise_scale_slot) {
          if (!close(all[k], step(b.kind, history, t, at_t, 0.0, fn))) {
            violation(path, t, "value differs from the deterministic " + std::string(to_string(b.kind)) + " relation");
          }
          continue;
        }
        const double scale = at_t[*s.noise_scale_slot];
        double noise = 0.0;
        if (const auto implied = implied_noise(b.kind, history, t, at_t, all[k])) {
          noise = *implied;
        } else {
          const auto rec = noise_by_address_.find(step_address(path, t));
          if (rec == noise_by_address_.end()) {
            violation(path, t, "missing noise record entry");
            ok = false;
            continue;
          }
          noise = scale * rec->second->value;
          if (!close(all[k], step(b.kind, history, t, at_t, noise, fn))) {
            violation(path, t, "value differs from the recorded non-Markov update");
          }
        }
        block_log_pdf += normal_log_pdf(noise, 0.0, scale);
      } catch (const BlockDomainError& e) {
        violation(path, t, e.what());
        ok = false;
      }
    }
    report.per_block[path] = block_log_pdf;
    // A block that failed to replay is not summed into its parent, so one
    // defect yields one violation.
    return ok && violations.size() == violations_before ? values : nullptr;
  }

  TimeWindow window_;
  const Trace& trace_;
  const FunctionRegistry& registry_;
  std::unordered_map<std::string, const NoiseDraw*> noise_by_address_;
};

}  // namespace

std::string ConsistencyViolation::describe() const {
  std::string out = path;
  if (t) out += " at t=" + std::to_string(*t);
  return out + ": " + message;
}

double normal_log_pdf(double x, double mean, double scale) {
  const double z = (x - mean) / scale;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(scale) - 0.5 * z * z;
}

double prior_log_pdf(const PriorSpec& prior, double value) {
  switch (prior.family) {
    case PriorSpec::Family::normal:
      return normal_log_pdf(value, prior.loc, prior.scale);
    case PriorSpec::Family::lognormal:
      if (!(value > 0.0)) return kNegInf;
      return normal_log_pdf(std::log(value), prior.loc, prior.scale) - std::log(value);
    case PriorSpec::Family::discrete_uniform:
      if (value != std::floor(value) || value < static_cast<double>(prior.lo) ||
          value > static_cast<double>(prior.hi)) {
        return kNegInf;
      }
      return -std::log(static_cast<double>(prior.hi - prior.lo + 1));
  }
  return kNegInf;
}

std::vector<ConsistencyViolation> check_consistency(const ModelExpr& model, TimeWindow window, const Trace& trace,
                                                    const FunctionRegistry& registry) {
  Scorer scorer(window, trace, registry);
  scorer.run(model);
  return std::move(scorer.violations);
}

LogDensityReport log_density(const ModelExpr& model, TimeWindow window, const Trace& trace,
                             const FunctionRegistry& registry) {
  if (const auto violations = validate(model, registry); !violations.empty()) {
    throw DensityError("invalid model: " + violations.front().message);
  }
  Scorer scorer(window, trace, registry);
  scorer.run(model);
  if (!scorer.scale_errors.empty()) throw DensityError(scorer.scale_errors.front());
  if (!scorer.violations.empty()) throw DensityError("inconsistent trace: " + scorer.violations.front().describe());

  LogDensityReport report = std::move(scorer.report);
  double total = 0.0;
  for (const auto& [path, lp] : report.per_block) total += lp;
  for (const auto& [key, lp] : report.per_global) total += lp;
  for (const auto& [path, lp] : report.per_changepoint) total += lp;
  report.total = total;
  return report;
}

}  // namespace stsl
