#include "stsl/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace stsl {
namespace {

using nlohmann::ordered_json;

std::string global_key(const GlobalKey& key) { return key.first + ":" + key.second; }

GlobalKey split_global_key(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw TraceFormatError("malformed global key '" + text + "'");
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

const ordered_json& field(const ordered_json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw TraceFormatError(std::string("trace is missing '") + name + "'");
  return j.at(name);
}

std::vector<double> series(const ordered_json& j, const std::string& what) {
  if (!j.is_array()) throw TraceFormatError(what + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw TraceFormatError(what + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ordered_json noise_to_json(const NoiseDraw& d) {
  ordered_json j;
  j["address"] = d.address;
  if (d.kind == DrawKind::normal) {
    j["kind"] = "normal";
    j["value"] = d.value;
    j["scale"] = d.scale;
    j["transform"] = d.transform == DrawTransform::exp ? "exp" : "identity";
  } else {
    j["kind"] = "discrete_uniform";
    j["value"] = static_cast<std::int64_t>(d.value);
    j["lo"] = d.lo;
    j["hi"] = d.hi;
  }
  return j;
}

NoiseDraw noise_from_json(const ordered_json& j) {
  NoiseDraw d;
  d.address = field(j, "address").get<std::string>();
  const auto kind = field(j, "kind").get<std::string>();
  d.value = field(j, "value").get<double>();
  if (kind == "normal") {
    d.kind = DrawKind::normal;
    d.scale = field(j, "scale").get<double>();
    const auto transform = field(j, "transform").get<std::string>();
    if (transform == "exp") {
      d.transform = DrawTransform::exp;
    } else if (transform != "identity") {
      throw TraceFormatError("unknown transform '" + transform + "'");
    }
  } else if (kind == "discrete_uniform") {
    d.kind = DrawKind::discrete_uniform;
    d.lo = field(j, "lo").get<std::int64_t>();
    d.hi = field(j, "hi").get<std::int64_t>();
  } else {
    throw TraceFormatError("unknown draw kind '" + kind + "'");
  }
  return d;
}

}  // namespace

ordered_json trace_to_json(const SampledDraw& draw, bool full_record) {
  const Trace& t = draw.trace;
  ordered_json j;
  j["draw"] = draw.draw;
  j["t0"] = t.window.t0;
  j["t1"] = t.window.t1;
  j["observed"] = t.observed;
  ordered_json globals = ordered_json::object();
  for (const auto& [key, value] : t.globals) globals[global_key(key)] = value;
  j["globals"] = std::move(globals);
  ordered_json changepoints = ordered_json::object();
  for (const auto& [path, t_star] : t.changepoints) changepoints[path] = t_star;
  j["changepoints"] = std::move(changepoints);
  if (full_record) {
    ordered_json latents = ordered_json::object();
    for (const auto& [path, values] : t.latents) latents[path] = values;
    j["latents"] = std::move(latents);
    ordered_json noises = ordered_json::array();
    for (const NoiseDraw& d : t.noises) noises.push_back(noise_to_json(d));
    j["noises"] = std::move(noises);
  }
  if (draw.logpdf) j["logpdf"] = *draw.logpdf;
  return j;
}

SampledDraw trace_from_json(const ordered_json& j) {
  try {
    SampledDraw out;
    out.draw = field(j, "draw").get<int>();
    Trace& t = out.trace;
    t.window = {field(j, "t0").get<std::int64_t>(), field(j, "t1").get<std::int64_t>()};
    t.observed = series(field(j, "observed"), "observed");
    for (const auto& [key, value] : field(j, "globals").items()) t.globals[split_global_key(key)] = value.get<double>();
    for (const auto& [path, value] : field(j, "changepoints").items()) t.changepoints[path] = value.get<std::int64_t>();
    if (j.contains("latents")) {
      for (const auto& [path, values] : j.at("latents").items()) t.latents[path] = series(values, "latent " + path);
    }
    if (j.contains("noises")) {
      for (const auto& d : j.at("noises")) t.noises.push_back(noise_from_json(d));
    }
    if (j.contains("logpdf")) out.logpdf = j.at("logpdf").get<double>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw TraceFormatError(std::string("malformed trace: ") + e.what());
  }
}

ordered_json report_to_json(const LogDensityReport& report) {
  ordered_json j;
  j["total"] = report.total;
  ordered_json blocks = ordered_json::object();
  for (const auto& [path, lp] : report.per_block) blocks[path] = lp;
  j["per_block"] = std::move(blocks);
  ordered_json globals = ordered_json::object();
  for (const auto& [key, lp] : report.per_global) globals[global_key(key)] = lp;
  j["per_global"] = std::move(globals);
  ordered_json changepoints = ordered_json::object();
  for (const auto& [path, lp] : report.per_changepoint) changepoints[path] = lp;
  j["per_changepoint"] = std::move(changepoints);
  return j;
}

std::string format_csv_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, std::span<const SampledDraw> draws, bool latents) {
  out << "draw,series,t,value\n";
  auto rows = [&](int draw, const std::string& name, const TimeWindow& w, const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      out << draw << ',' << name << ',' << (w.t0 + static_cast<std::int64_t>(k)) << ','
          << format_csv_number(values[k]) << '\n';
    }
  };
  for (const SampledDraw& d : draws) {
    rows(d.draw, "y", d.trace.window, d.trace.observed);
    if (latents) {
      for (const auto& [path, values] : d.trace.latents) rows(d.draw, path, d.trace.window, values);
    }
    if (d.logpdf) out << d.draw << ",logpdf," << d.trace.window.t0 << ',' << format_csv_number(*d.logpdf) << '\n';
  }
}

}  // namespace stsl
