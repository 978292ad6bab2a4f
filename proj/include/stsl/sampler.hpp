#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stsl/ast.hpp"
#include "stsl/blocks.hpp"

namespace stsl {

/// Half-open simulation range [t0, t1).
struct TimeWindow {
  std::int64_t t0 = 0;
  std::int64_t t1 = 1;

  std::int64_t length() const { return t1 - t0; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

enum class DrawKind { normal, discrete_uniform };

/// How a primitive draw maps to the recorded quantity: exp for log-normal
/// prior draws, identity otherwise.
enum class DrawTransform { identity, exp };

/// One primitive random draw. For normals `value` is the standard-normal
/// deviate z and the realized quantity is scale * z (or exp(z)); for discrete
/// uniforms `value` is the integer drawn from [lo, hi].
struct NoiseDraw {
  std::string address;
  DrawKind kind = DrawKind::normal;
  double value = 0.0;
  double scale = 1.0;
  DrawTransform transform = DrawTransform::identity;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend bool operator==(const NoiseDraw&, const NoiseDraw&) = default;
};

using GlobalKey = std::pair<std::string, std::string>;  // (block path, slot)

struct Trace {
  TimeWindow window;
  std::vector<double> observed;
  std::map<std::string, std::vector<double>> latents;
  std::map<GlobalKey, double> globals;
  std::map<std::string, std::int64_t> changepoints;  // 1-based t* within the window
  std::vector<NoiseDraw> noises;
  friend bool operator==(const Trace&, const Trace&) = default;
};

// Noise record addresses.
std::string step_address(const std::string& path, std::int64_t t);
std::string global_address(const std::string& path, const std::string& slot);
std::string changepoint_address(const std::string& path);

class SamplingError : public std::runtime_error {
 public:
  enum class Kind { invalid_model, window, positivity, nonfinite, domain, replay };

  SamplingError(Kind kind, std::string path, const std::string& message);

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }

 private:
  Kind kind_;
  std::string path_;
};

bool contains_changepoint(const ModelExpr& model);

/// Throws SamplingError(window) unless the window fits the model.
void check_window(const ModelExpr& model, TimeWindow window);

/// Draws one prior-predictive realization. Evaluation order is depth-first,
/// left to right: per block, prior draws for "?" slots in schema order, then
/// sub-model slots over the whole window, then the block's own values
/// t0..t1-1. A changepoint realizes left, then right, then draws t*.
Trace sample_trace(const ModelExpr& model, TimeWindow window, RngSpec rng,
                   const FunctionRegistry& registry = FunctionRegistry::builtin());

/// Re-runs the deterministic evaluation, taking every primitive draw from
/// `record` in order instead of the generator. Replaying a sampled trace's
/// record reproduces that trace exactly.
Trace replay_trace(const ModelExpr& model, TimeWindow window, const std::vector<NoiseDraw>& record,
                   const FunctionRegistry& registry = FunctionRegistry::builtin());

/// Draw i uses stream rng.stream + i.
std::vector<Trace> sample_prior_predictive(const ModelExpr& model, TimeWindow window, RngSpec rng, int draws,
                                           const FunctionRegistry& registry = FunctionRegistry::builtin());

/// Pointwise sum of trajectories, accumulated left to right.
std::vector<double> sum_series(const std::vector<const std::vector<double>*>& parts, std::size_t length);

/// Concatenation at 1-based index t_star: left[0, t_star-1) then right[t_star-1, T).
std::vector<double> splice(const std::vector<double>& left, const std::vector<double>& right, std::int64_t t_star);

/// Realized value of a recorded prior draw.
double prior_value(const PriorSpec& prior, const NoiseDraw& draw);

}  // namespace stsl
