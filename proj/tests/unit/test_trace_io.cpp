#include <sstream>

#include "doctest.h"
#include "stsl/density.hpp"
#include "stsl/parser.hpp"
#include "stsl/trace_io.hpp"
#include "support/random_ast.hpp"

using namespace stsl;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("csv for the zero model") {
  const auto m = parse("zero()");
  const std::vector<SampledDraw> draws{{0, sample_trace(m, {0, 3}, {0, 0}), std::nullopt}};
  std::ostringstream out;
  write_csv(out, draws, false);
  CHECK(out.str() == "draw,series,t,value\n0,y,0,0\n0,y,1,0\n0,y,2,0\n");
}

TEST_CASE("csv with latents and logpdf") {
  const auto m = parse("noise(loc=rw(scale=0.5))");
  std::vector<SampledDraw> draws;
  for (int i = 0; i < 2; ++i) {
    SampledDraw d{i, sample_trace(m, {5, 9}, {1, static_cast<std::uint64_t>(i)}), std::nullopt};
    d.logpdf = log_density(m, {5, 9}, d.trace).total;
    draws.push_back(std::move(d));
  }
  std::ostringstream out;
  write_csv(out, draws, true);
  const auto lines = split(out.str(), '\n');
  CHECK(lines.front() == "draw,series,t,value");
  CHECK(lines.back().empty());
  // Header, per draw (y + two latents) x 4 steps + logpdf, trailing empty.
  CHECK(lines.size() == 1 + 2 * (3 * 4 + 1) + 1);
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    REQUIRE(cells.size() == 4);
    const double v = std::stod(cells[3]);
    CHECK(std::isfinite(v));
  }
  CHECK(lines[1].rfind("0,y,5,", 0) == 0);
  CHECK(lines[13].rfind("0,logpdf,5,", 0) == 0);
  CHECK(std::stod(split(lines[13], ',')[3]) == *draws[0].logpdf);
}

TEST_CASE("csv numbers round-trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 123456789.123456789, -0.0}) {
    CHECK(std::stod(format_csv_number(v)) == v);
  }
}

TEST_CASE("property: json serialize, parse, serialize is byte-identical") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    testing::AstGenerator gen(seed + 9000, {2, 3, true, true});
    const ModelExpr m = gen.model();
    SampledDraw d{static_cast<int>(seed), sample_trace(m, {-2, 12}, {seed, 0}), std::nullopt};
    d.logpdf = log_density(m, {-2, 12}, d.trace).total;
    const std::string text = trace_to_json(d, true).dump();
    const SampledDraw back = trace_from_json(ordered_json::parse(text));
    CHECK(back.trace == d.trace);
    CHECK(back.logpdf == d.logpdf);
    CHECK(trace_to_json(back, true).dump() == text);
    CHECK(log_density(m, {-2, 12}, back.trace).total == *d.logpdf);
  }
}

TEST_CASE("json without the full record omits latents and noises") {
  const auto m = parse("noise(loc=cp(zero(), trend(a0=?)))");
  const SampledDraw d{3, sample_trace(m, {0, 8}, {2, 0}), std::nullopt};
  const auto j = trace_to_json(d, false);
  CHECK(j.at("draw") == 3);
  CHECK(j.contains("observed"));
  CHECK(j.at("globals").contains("0/loc/0/right/0:a0"));
  CHECK(j.at("changepoints").contains("0/loc/0"));
  CHECK_FALSE(j.contains("latents"));
  CHECK_FALSE(j.contains("noises"));
  CHECK_FALSE(j.contains("logpdf"));
}

TEST_CASE("malformed traces") {
  const auto good = trace_to_json({0, sample_trace(parse("rw()"), {0, 3}, {0, 0}), std::nullopt}, true);
  CHECK_NOTHROW(trace_from_json(good));
  for (const char* key : {"draw", "t0", "t1", "observed", "globals", "changepoints"}) {
    auto bad = good;
    bad.erase(key);
    CHECK_THROWS_AS(trace_from_json(bad), TraceFormatError);
  }
  {
    auto bad = good;
    bad["observed"][1] = "x";
    CHECK_THROWS_AS(trace_from_json(bad), TraceFormatError);
  }
  {
    auto bad = good;
    bad["noises"][0]["kind"] = "cauchy";
    CHECK_THROWS_AS(trace_from_json(bad), TraceFormatError);
  }
  {
    auto bad = good;
    bad["globals"]["nocolon"] = 1.0;
    CHECK_THROWS_AS(trace_from_json(bad), TraceFormatError);
  }
  CHECK_THROWS_AS(trace_from_json(ordered_json::array()), TraceFormatError);
}

TEST_CASE("report json") {
  const auto m = parse("cp(zero(), rw(scale=?))");
  const Trace tr = sample_trace(m, {0, 6}, {1, 0});
  const auto j = report_to_json(log_density(m, {0, 6}, tr));
  CHECK(j.at("per_changepoint").at("0") == -std::log(4.0));
  CHECK(j.at("per_global").contains("0/right/0:scale"));
  CHECK(j.at("per_block").contains("0/right/0"));
  CHECK(j.begin().key() == "total");
}
