#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stsl/density.hpp"
#include "stsl/sampler.hpp"

namespace stsl {

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SampledDraw {
  int draw = 0;
  Trace trace;
  std::optional<double> logpdf;
};

/// {draw, t0, t1, observed, globals, changepoints[, latents, noises][, logpdf]}.
/// Globals are keyed "path:slot".
nlohmann::ordered_json trace_to_json(const SampledDraw& draw, bool full_record);
SampledDraw trace_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json report_to_json(const LogDensityReport& report);

/// Long-format CSV, header "draw,series,t,value". Rows are draw-major; within
/// a draw "y" first, then latents by path, each time-major. Values use 17
/// significant digits.
void write_csv(std::ostream& out, std::span<const SampledDraw> draws, bool latents);

std::string format_csv_number(double value);

}  // namespace stsl
