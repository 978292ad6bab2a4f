#include "stsl/sampler.hpp"

#include <cmath>
#include <limits>

#include "stsl/rng.hpp"

namespace stsl {
namespace {

struct ResolvedSlot {
  double constant = 0.0;
  const std::vector<double>* series = nullptr;

  double at(std::size_t i) const { return series != nullptr ? (*series)[i] : constant; }
};

class Realizer {
 public:
  Realizer(TimeWindow window, RngSpec spec, const FunctionRegistry& registry)
      : window_(window), rng_(spec.seed, spec.stream), registry_(registry) {
    trace_.window = window;
  }

  Realizer(TimeWindow window, const std::vector<NoiseDraw>& record, const FunctionRegistry& registry)
      : Realizer(window, RngSpec{}, registry) {
    replay_ = &record;
  }

  Trace run(const ModelExpr& model) {
    trace_.observed = model_series(model, "", "");
    if (replay_ != nullptr && replay_pos_ != replay_->size()) {
      throw SamplingError(SamplingError::Kind::replay, "", "noise record has unused entries");
    }
    return std::move(trace_);
  }

 private:
  std::size_t length() const { return static_cast<std::size_t>(window_.length()); }

  // Next primitive draw, from the generator or from the replayed record.
  const NoiseDraw* replayed(const std::string& address, DrawKind kind) {
    if (replay_ == nullptr) return nullptr;
    if (replay_pos_ >= replay_->size()) {
      throw SamplingError(SamplingError::Kind::replay, address, "noise record ends early");
    }
    const NoiseDraw& d = (*replay_)[replay_pos_++];
    if (d.address != address || d.kind != kind) {
      throw SamplingError(SamplingError::Kind::replay, address, "noise record has '" + d.address + "' here");
    }
    return &d;
  }

  double draw_normal(const std::string& address) {
    const NoiseDraw* d = replayed(address, DrawKind::normal);
    return d != nullptr ? d->value : rng_.normal();
  }

  std::int64_t draw_int(const std::string& address, std::int64_t lo, std::int64_t hi) {
    const NoiseDraw* d = replayed(address, DrawKind::discrete_uniform);
    if (d == nullptr) return rng_.uniform_int(lo, hi);
    if (d->lo != lo || d->hi != hi || d->value != std::floor(d->value) || d->value < static_cast<double>(lo) ||
        d->value > static_cast<double>(hi)) {
      throw SamplingError(SamplingError::Kind::replay, address, "recorded integer draw does not fit its support");
    }
    return static_cast<std::int64_t>(d->value);
  }

  std::vector<double> model_series(const ModelExpr& m, const std::string& parent, std::string_view slot) {
    std::vector<const std::vector<double>*> parts;
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
      const std::string path = term_path(parent, slot, i);
      parts.push_back(&std::visit([&](const auto& b) -> const std::vector<double>& { return term(b, path); },
                                  m.terms[i]));
    }
    return sum_series(parts, length());
  }

  const std::vector<double>& store(const std::string& path, std::vector<double> values) {
    return trace_.latents[path] = std::move(values);
  }

  const std::vector<double>& term(const ChangepointBlock& cp, const std::string& path) {
    const auto left = model_series(*cp.left, path, "left");
    const auto right = model_series(*cp.right, path, "right");
    const std::int64_t t_star = draw_int(changepoint_address(path), 2, window_.length() - 1);
    trace_.noises.push_back({changepoint_address(path), DrawKind::discrete_uniform, static_cast<double>(t_star), 1.0,
                             DrawTransform::identity, 2, window_.length() - 1});
    trace_.changepoints[path] = t_star;
    return store(path, splice(left, right, t_star));
  }

  double draw_global(const std::string& path, const SlotSpec& spec) {
    const PriorSpec& prior = *spec.default_prior;
    NoiseDraw draw{global_address(path, spec.name), DrawKind::normal, 0.0, prior.scale, DrawTransform::identity,
                   0, 0};
    switch (prior.family) {
      case PriorSpec::Family::normal:
        draw.value = draw_normal(draw.address);
        break;
      case PriorSpec::Family::lognormal:
        draw.value = draw_normal(draw.address);
        draw.transform = DrawTransform::exp;
        break;
      case PriorSpec::Family::discrete_uniform:
        draw.kind = DrawKind::discrete_uniform;
        draw.lo = prior.lo;
        draw.hi = prior.hi;
        draw.value = static_cast<double>(draw_int(draw.address, prior.lo, prior.hi));
        break;
    }
    const double value = prior_value(prior, draw);
    trace_.noises.push_back(std::move(draw));
    if (!std::isfinite(value)) {
      throw SamplingError(SamplingError::Kind::nonfinite, path, "prior draw for '" + spec.name + "' is not finite");
    }
    trace_.globals[{path, spec.name}] = value;
    return value;
  }

  const std::vector<double>& term(const BasicBlock& b, const std::string& path) {
    const BlockSchema& s = schema(b.kind);
    const std::size_t n_slots = s.slots.size();
    std::vector<ResolvedSlot> slots(n_slots);
    std::vector<std::vector<double>> owned(n_slots);
    const NonMarkovFn* fn = nullptr;

    auto bound = [&](const SlotSpec& spec) -> const ParamValue* {
      const auto it = b.params.find(spec.name);
      return it == b.params.end() ? nullptr : &it->second;
    };

    // Globals first, in schema order.
    for (std::size_t i = 0; i < n_slots; ++i) {
      const SlotSpec& spec = s.slots[i];
      const ParamValue* v = bound(spec);
      const bool draws = v != nullptr ? std::holds_alternative<PriorDraw>(*v)
                                      : std::holds_alternative<PriorDraw>(spec.default_value);
      if (draws) slots[i].constant = draw_global(path, spec);
    }

    // Then literals, functions and sub-models.
    for (std::size_t i = 0; i < n_slots; ++i) {
      const SlotSpec& spec = s.slots[i];
      const ParamValue* v = bound(spec);
      if (v == nullptr) {
        if (const auto* lit = std::get_if<Literal>(&spec.default_value)) slots[i].constant = lit->value;
        continue;
      }
      if (const auto* lit = std::get_if<Literal>(v)) {
        slots[i].constant = lit->value;
      } else if (const auto* named = std::get_if<NamedFunction>(v)) {
        fn = registry_.find(named->name);
        slots[i].constant = std::numeric_limits<double>::quiet_NaN();
      } else if (const auto* sub = std::get_if<SubModel>(v)) {
        owned[i] = model_series(*sub->model, path, spec.name);
        if (spec.requires_positive_trajectory) {
          for (std::size_t k = 0; k < owned[i].size(); ++k) {
            if (!(owned[i][k] > 0.0)) {
              throw SamplingError(SamplingError::Kind::positivity, path + "/" + spec.name,
                                  "sub-model feeding '" + spec.name + "' produced " + format_number(owned[i][k]) +
                                      " at t=" + std::to_string(window_.t0 + static_cast<std::int64_t>(k)) +
                                      "; the slot requires strictly positive values");
            }
          }
        }
        slots[i].series = &owned[i];
      }
    }

    std::vector<double> values;
    values.reserve(length());
    std::vector<double> at_t(n_slots);
    for (std::size_t k = 0; k < length(); ++k) {
      const std::int64_t t = window_.t0 + static_cast<std::int64_t>(k);
      for (std::size_t i = 0; i < n_slots; ++i) at_t[i] = slots[i].at(k);
      double noise = 0.0;
      if (s.noise_scale_slot) {
        const double scale = at_t[*s.noise_scale_slot];
        std::string address = step_address(path, t);
        const double z = draw_normal(address);
        trace_.noises.push_back({std::move(address), DrawKind::normal, z, scale, DrawTransform::identity, 0, 0});
        noise = scale * z;
      }
      double value = 0.0;
      try {
        value = step(b.kind, values, t, at_t, noise, fn);
      } catch (const BlockDomainError& e) {
        throw SamplingError(SamplingError::Kind::domain, path, e.what());
      }
      if (!std::isfinite(value)) {
        throw SamplingError(SamplingError::Kind::nonfinite, path,
                            "non-finite value at t=" + std::to_string(t));
      }
      values.push_back(value);
    }
    return store(path, std::move(values));
  }

  TimeWindow window_;
  CounterRng rng_;
  const FunctionRegistry& registry_;
  const std::vector<NoiseDraw>* replay_ = nullptr;
  std::size_t replay_pos_ = 0;
  Trace trace_;
};

}  // namespace

std::string step_address(const std::string& path, std::int64_t t) { return path + "@" + std::to_string(t); }
std::string global_address(const std::string& path, const std::string& slot) { return path + ":" + slot; }
std::string changepoint_address(const std::string& path) { return path + ":t*"; }

SamplingError::SamplingError(Kind kind, std::string path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message), kind_(kind), path_(std::move(path)) {}

bool contains_changepoint(const ModelExpr& model) {
  for (const BlockExpr& term : model.terms) {
    if (std::holds_alternative<ChangepointBlock>(term)) return true;
    for (const auto& [name, value] : std::get<BasicBlock>(term).params) {
      const auto* sub = std::get_if<SubModel>(&value);
      if (sub != nullptr && sub->model && contains_changepoint(*sub->model)) return true;
    }
  }
  return false;
}

void check_window(const ModelExpr& model, TimeWindow window) {
  if (window.t1 <= window.t0) {
    throw SamplingError(SamplingError::Kind::window, "", "time window needs t1 > t0");
  }
  if (window.length() < 3 && contains_changepoint(model)) {
    throw SamplingError(SamplingError::Kind::window, "",
                        "a changepoint model needs a window of at least 3 steps");
  }
}

Trace sample_trace(const ModelExpr& model, TimeWindow window, RngSpec rng, const FunctionRegistry& registry) {
  if (const auto violations = validate(model, registry); !violations.empty()) {
    throw SamplingError(SamplingError::Kind::invalid_model, violations.front().path, violations.front().message);
  }
  check_window(model, window);
  return Realizer(window, rng, registry).run(model);
}

Trace replay_trace(const ModelExpr& model, TimeWindow window, const std::vector<NoiseDraw>& record,
                   const FunctionRegistry& registry) {
  if (const auto violations = validate(model, registry); !violations.empty()) {
    throw SamplingError(SamplingError::Kind::invalid_model, violations.front().path, violations.front().message);
  }
  check_window(model, window);
  return Realizer(window, record, registry).run(model);
}

std::vector<Trace> sample_prior_predictive(const ModelExpr& model, TimeWindow window, RngSpec rng, int draws,
                                           const FunctionRegistry& registry) {
  if (draws < 1) throw std::invalid_argument("draws must be >= 1");
  std::vector<Trace> out;
  out.reserve(static_cast<std::size_t>(draws));
  for (int i = 0; i < draws; ++i) {
    out.push_back(sample_trace(model, window, {rng.seed, rng.stream + static_cast<std::uint64_t>(i)}, registry));
  }
  return out;
}

std::vector<double> sum_series(const std::vector<const std::vector<double>*>& parts, std::size_t length) {
  std::vector<double> out(length, 0.0);
  if (parts.empty()) return out;
  out = *parts.front();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    for (std::size_t k = 0; k < length; ++k) out[k] += (*parts[p])[k];
  }
  return out;
}

std::vector<double> splice(const std::vector<double>& left, const std::vector<double>& right, std::int64_t t_star) {
  std::vector<double> out(right);
  const auto cut = static_cast<std::size_t>(t_star - 1);
  for (std::size_t k = 0; k < cut && k < out.size(); ++k) out[k] = left[k];
  return out;
}

double prior_value(const PriorSpec& prior, const NoiseDraw& draw) {
  switch (prior.family) {
    case PriorSpec::Family::normal:
      return prior.loc + prior.scale * draw.value;
    case PriorSpec::Family::lognormal:
      return std::exp(prior.loc + prior.scale * draw.value);
    case PriorSpec::Family::discrete_uniform:
      return draw.value;
  }
  return draw.value;
}

}  // namespace stsl
