// stsl: check, sample, score and enumerate structural time series models.
//
// Exit codes: 0 success, 1 model/validation/domain error, 2 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stsl/density.hpp"
#include "stsl/parser.hpp"
#include "stsl/sampler.hpp"
#include "stsl/search.hpp"
#include "stsl/trace_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kIoError = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

// Prints positioned diagnostics and returns nullopt on a parse failure.
std::optional<stsl::ModelExpr> load_model(const std::string& path) {
  const std::string src = read_file(path);
  try {
    return stsl::parse(src);
  } catch (const stsl::ParseError& e) {
    for (const auto& d : e.diagnostics()) {
      std::cerr << path << ':' << d.line << ':' << d.col << ": error: " << d.message << '\n';
    }
    return std::nullopt;
  }
}

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path_ != "-") {
      file_.open(path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot write '" + path_ + "'");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("error while writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

struct SampleOptions {
  std::string file;
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;
  int draws = 1;
  std::uint64_t seed = 0;
  std::string format = "csv";
  bool latents = false;
  bool emit_logpdf = false;
  std::string out = "-";
};

int cmd_check(const std::string& file) {
  const auto model = load_model(file);
  if (!model) return kDomainError;
  std::cout << "OK\n" << stsl::print_canonical(*model) << '\n';
  return kOk;
}

int cmd_sample(const SampleOptions& opt) {
  const auto model = load_model(opt.file);
  if (!model) return kDomainError;
  const stsl::TimeWindow window{opt.t0, opt.t1};
  std::vector<stsl::SampledDraw> draws;
  try {
    const auto traces = stsl::sample_prior_predictive(*model, window, {opt.seed, 0}, opt.draws);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      stsl::SampledDraw d{static_cast<int>(i), traces[i], std::nullopt};
      if (opt.emit_logpdf) d.logpdf = stsl::log_density(*model, window, d.trace).total;
      draws.push_back(std::move(d));
    }
  } catch (const stsl::SamplingError& e) {
    std::cerr << opt.file << ": error: " << e.what() << '\n';
    return kDomainError;
  } catch (const stsl::DensityError& e) {
    std::cerr << opt.file << ": error: " << e.what() << '\n';
    return kDomainError;
  }

  Output out(opt.out);
  if (opt.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& d : draws) arr.push_back(stsl::trace_to_json(d, opt.latents));
    out.stream() << arr.dump() << '\n';
  } else {
    stsl::write_csv(out.stream(), draws, opt.latents);
  }
  out.finish();
  return kOk;
}

int cmd_score(const std::string& file, const std::string& trace_path, std::optional<std::int64_t> t0,
              std::optional<std::int64_t> t1) {
  const auto model = load_model(file);
  if (!model) return kDomainError;
  const std::string text = read_file(trace_path);
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << trace_path << ": error: " << e.what() << '\n';
    return kDomainError;
  }
  const bool many = doc.is_array();
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  for (const auto& item : many ? doc : nlohmann::ordered_json::array({doc})) {
    try {
      const stsl::SampledDraw d = stsl::trace_from_json(item);
      stsl::TimeWindow window = d.trace.window;
      if ((t0 && *t0 != window.t0) || (t1 && *t1 != window.t1)) {
        std::cerr << trace_path << ": error: draw " << d.draw << " was sampled over [" << window.t0 << ", "
                  << window.t1 << "), not the requested window\n";
        return kDomainError;
      }
      const auto violations = stsl::check_consistency(*model, window, d.trace);
      if (!violations.empty()) {
        std::cerr << trace_path << ": error: draw " << d.draw << ": " << violations.front().describe() << '\n';
        return kDomainError;
      }
      auto report = stsl::report_to_json(stsl::log_density(*model, window, d.trace));
      nlohmann::ordered_json row;
      row["draw"] = d.draw;
      for (auto& [key, value] : report.items()) row[key] = value;
      reports.push_back(std::move(row));
    } catch (const std::exception& e) {
      std::cerr << trace_path << ": error: " << e.what() << '\n';
      return kDomainError;
    }
  }
  std::cout << (many ? reports : reports.at(0)).dump(2) << '\n';
  return kOk;
}

int cmd_enumerate(const std::vector<std::string>& blocks, std::size_t max_terms, std::size_t max_depth,
                  bool changepoints, bool prior_draws, bool count_only) {
  stsl::EnumBudget budget;
  for (const auto& name : blocks) {
    const auto kind = stsl::block_kind_from_name(name);
    if (!kind) {
      std::cerr << "error: unknown block '" << name << "'\n";
      return kDomainError;
    }
    budget.vocabulary.push_back(*kind);
  }
  budget.max_terms = max_terms;
  budget.max_depth = max_depth;
  budget.allow_changepoints = changepoints;
  budget.slot_policy = prior_draws ? stsl::SlotPolicy::defaults_plus_prior_draws : stsl::SlotPolicy::defaults_only;
  try {
    if (count_only) {
      std::cout << stsl::count(budget) << '\n';
    } else {
      for (const auto& text : stsl::enumerate_canonical(budget)) std::cout << text << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural time series model language"};
  app.require_subcommand(1);

  std::string check_file;
  auto* check = app.add_subcommand("check", "Parse and validate a model file");
  check->add_option("file", check_file, "Model file (*.sts)")->required();

  SampleOptions sample_opt;
  auto* sample = app.add_subcommand("sample", "Draw prior-predictive traces");
  sample->add_option("file", sample_opt.file, "Model file (*.sts)")->required();
  sample->add_option("--t0", sample_opt.t0, "Window start (inclusive)");
  sample->add_option("--t1", sample_opt.t1, "Window end (exclusive)")->required();
  sample->add_option("--draws", sample_opt.draws, "Number of draws")->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_opt.seed, "RNG seed");
  sample->add_option("--format", sample_opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sample->add_flag("--latents", sample_opt.latents, "Include latent series (and the full record in JSON)");
  sample->add_flag("--emit-logpdf", sample_opt.emit_logpdf, "Append each draw's joint log density");
  sample->add_option("--out", sample_opt.out, "Output path, '-' for stdout");

  std::string score_file, trace_path;
  std::optional<std::int64_t> score_t0, score_t1;
  auto* score = app.add_subcommand("score", "Joint log density of sampled traces");
  score->add_option("file", score_file, "Model file (*.sts)")->required();
  score->add_option("--trace", trace_path, "Trace JSON from 'sample --format json --latents'")->required();
  score->add_option("--t0", score_t0, "Expected window start");
  score->add_option("--t1", score_t1, "Expected window end");

  std::vector<std::string> enum_blocks;
  std::size_t max_terms = 1, max_depth = 0;
  bool enum_changepoints = false, enum_prior_draws = false, count_only = false;
  auto* enumerate = app.add_subcommand("enumerate", "List model sentences within a budget");
  enumerate->add_option("--blocks", enum_blocks, "Block vocabulary")->delimiter(',')->required();
  enumerate->add_option("--max-terms", max_terms, "Maximum terms per sum")->check(CLI::PositiveNumber);
  enumerate->add_option("--max-depth", max_depth, "Maximum nesting depth");
  enumerate->add_flag("--changepoints", enum_changepoints, "Allow changepoint blocks");
  enumerate->add_flag("--prior-draws", enum_prior_draws, "Also bind slots to '?'");
  enumerate->add_flag("--count-only", count_only, "Print only the number of sentences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kDomainError;
  }

  try {
    if (*check) return cmd_check(check_file);
    if (*sample) return cmd_sample(sample_opt);
    if (*score) return cmd_score(score_file, trace_path, score_t0, score_t1);
    if (*enumerate) {
      return cmd_enumerate(enum_blocks, max_terms, max_depth, enum_changepoints, enum_prior_draws, count_only);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kDomainError;
}
