#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsl/ast.hpp"
#include "stsl/blocks.hpp"
#include "stsl/sampler.hpp"

namespace stsl {

/// Joint log-density split along the block factorization
/// log p(x, z, u) = log p(x | z, u) + log p(u) + sum_i log p(z_i | z_-i).
/// The observation term is carried by the noise blocks in per_block.
struct LogDensityReport {
  double total = 0.0;
  std::map<std::string, double> per_block;
  std::map<GlobalKey, double> per_global;
  std::map<std::string, double> per_changepoint;
};

struct ConsistencyViolation {
  std::string path;  // block path, or "y" for the observed series
  std::optional<std::int64_t> t;
  std::string message;

  std::string describe() const;
};

class DensityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tolerance for deterministic relations between recorded values.
inline constexpr double kConsistencyTolerance = 1e-9;

double normal_log_pdf(double x, double mean, double scale);

/// Log density of a value under a slot's default prior (-inf outside support).
double prior_log_pdf(const PriorSpec& prior, double value);

/// Every way the trace fails to replay under the model's deterministic
/// relations. Stochastic blocks absorb any value; only their density changes.
std::vector<ConsistencyViolation> check_consistency(
    const ModelExpr& model, TimeWindow window, const Trace& trace,
    const FunctionRegistry& registry = FunctionRegistry::builtin());

/// Scores a trace. Stochastic blocks are scored in noise space: the implied
/// scaled noise at each step under Normal(0, scale(t)); non-Markov blocks read
/// the noise from the trace's record. Throws DensityError on any consistency
/// violation or non-positive scale.
LogDensityReport log_density(const ModelExpr& model, TimeWindow window, const Trace& trace,
                             const FunctionRegistry& registry = FunctionRegistry::builtin());

}  // namespace stsl
