#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nstload/features.hpp"
#include "nstload/report.hpp"
#include "nstload/synth.hpp"

namespace nstload::cli {

using nlohmann::json;
namespace fs = std::filesystem;

void Config::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(window_len_s)) throw Error(ErrorCode::invalid_argument, "--window-secs must be positive and finite");
  if (!positive(tolerance_threshold) || tolerance_threshold > 1.0) {
    throw Error(ErrorCode::invalid_argument, "--tolerance-threshold must lie in (0, 1]");
  }
  if (!std::isfinite(min_improvement) || min_improvement < 0.0) {
    throw Error(ErrorCode::invalid_argument, "--min-improvement must be finite and non-negative");
  }
  if (!std::isfinite(band.low_c) || !std::isfinite(band.high_c) || !(band.low_c < band.high_c)) {
    throw Error(ErrorCode::invalid_argument, "--temp-band needs finite LOW < HIGH");
  }
}

StepwiseConfig Config::stepwise() const {
  StepwiseConfig s;
  s.tolerance_threshold = tolerance_threshold;
  s.paper_literal_tolerance = paper_literal_tolerance;
  s.selection = selection;
  s.min_improvement = min_improvement;
  return s;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void print_aligned(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) line += "  ";
      const auto pad = std::string(width[j] - r[j].size(), ' ');
      line += j < 2 ? r[j] + pad : pad + r[j];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
}

// Sink for command output: stdout unless --out names a file.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  void write(const std::string& text) {
    if (path_.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path_);
    f << text;
    if (!f) throw Error(ErrorCode::io, "write failed for " + path_);
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

FeatureOptions feature_options(const Config& cfg) {
  FeatureOptions o;
  o.window_len_s = cfg.window_len_s;
  o.rest_agg = cfg.rest_agg;
  o.band = cfg.band;
  return o;
}

FeatureTable load_table(const std::string& manifest, const Config& cfg) {
  auto records = load_manifest(manifest, cfg.band);
  auto table = build_features(records, feature_options(cfg));
  // File name only, so identical studies in different directories report identically.
  table.manifest_path = fs::path(manifest).filename().string();
  return table;
}

int cmd_validate(const std::string& manifest, const Config& cfg, std::ostream& out) {
  auto scan = scan_manifest(manifest, cfg.band);
  const auto fmt = cfg.output_format.value_or(OutputFormat::text);
  if (fmt == OutputFormat::json) {
    json diags = json::array();
    for (const auto& d : scan.diagnostics) {
      diags.push_back({{"code", std::string(to_string(d.code))}, {"location", d.location}, {"message", d.message}});
    }
    json doc = {{"ok", scan.ok()}, {"valid_sessions", scan.records.size()}, {"diagnostics", diags}};
    out << doc.dump(2) << '\n';
  } else {
    for (const auto& d : scan.diagnostics) out << d.location << ": " << to_string(d.code) << ": " << d.message << '\n';
    if (scan.ok()) out << "OK: " << scan.records.size() << " sessions valid\n";
    else out << "FAILED: " << scan.diagnostics.size() << " problem(s), " << scan.records.size() << " sessions valid\n";
  }
  if (scan.ok()) return kOk;
  return scan.has_io_failure() ? kIoError : kDomainError;
}

int cmd_metrics(const std::string& manifest, const Config& cfg, Output& sink) {
  const auto table = load_table(manifest, cfg);
  const auto fmt = cfg.output_format.value_or(OutputFormat::text);
  std::ostringstream os;
  if (fmt == OutputFormat::json) {
    json rows = json::array();
    for (const auto& r : table.rows) {
      rows.push_back({{"subject_id", r.subject_id}, {"task_id", r.task_id}, {"wmax", r.wmax}, {"wave", r.wave},
                      {"wsum", r.wsum}, {"n_windows", r.n_windows}, {"rest_nst_c", r.rest_nst_c}});
    }
    os << json{{"metrics", rows}, {"config_digest", table.config_digest}}.dump(2) << '\n';
  } else if (fmt == OutputFormat::csv) {
    os << "subject_id,task_id,wmax,wave,wsum,n_windows,rest_nst_c\n";
    for (const auto& r : table.rows) {
      os << r.subject_id << ',' << r.task_id << ',' << format_double(r.wmax) << ',' << format_double(r.wave) << ','
         << format_double(r.wsum) << ',' << r.n_windows << ',' << format_double(r.rest_nst_c) << '\n';
    }
  } else {
    std::vector<std::vector<std::string>> rows{{"subject", "task", "WMAX", "WAVE", "WSUM", "windows", "rest NST"}};
    for (const auto& r : table.rows) {
      rows.push_back({r.subject_id, r.task_id, fixed(r.wmax, 4), fixed(r.wave, 4), fixed(r.wsum, 4),
                      std::to_string(r.n_windows), fixed(r.rest_nst_c, 4)});
    }
    print_aligned(os, rows);
  }
  sink.write(os.str());
  return kOk;
}

int cmd_features(const std::string& manifest, const Config& cfg, Output& sink) {
  const auto table = load_table(manifest, cfg);
  const auto fmt = cfg.output_format.value_or(OutputFormat::csv);
  std::ostringstream os;
  if (fmt == OutputFormat::csv) {
    write_features_csv(os, table);
  } else if (fmt == OutputFormat::json) {
    json rows = json::array();
    for (const auto& r : table.rows) {
      json row = {{"subject_id", r.subject_id}, {"task_id", r.task_id}, {"wmax", r.wmax},
                  {"wave", r.wave},             {"wsum", r.wsum},       {"log_time", r.log_time}};
      for (auto s : kSubscales) row[std::string(to_string(s))] = r.targets[s];
      rows.push_back(std::move(row));
    }
    os << json{{"rows", rows}, {"manifest", table.manifest_path}, {"config_digest", table.config_digest}}.dump(2)
       << '\n';
  } else {
    std::vector<std::vector<std::string>> rows{{"subject", "task", "WMAX", "WAVE", "WSUM", "ln(time)"}};
    for (auto s : kSubscales) rows.front().emplace_back(to_string(s));
    for (const auto& r : table.rows) {
      std::vector<std::string> row{r.subject_id, r.task_id, fixed(r.wmax, 4), fixed(r.wave, 4), fixed(r.wsum, 4),
                                   fixed(r.log_time, 4)};
      for (auto s : kSubscales) row.push_back(fixed(r.targets[s], 2));
      rows.push_back(std::move(row));
    }
    print_aligned(os, rows);
  }
  sink.write(os.str());
  return kOk;
}

int emit_report(const ModelReport& report, const Config& cfg, Output& sink, std::ostream& err) {
  const auto fmt = cfg.output_format.value_or(OutputFormat::text);
  if (fmt == OutputFormat::csv) throw Error(ErrorCode::invalid_argument, "reports support text or json output");
  sink.write(fmt == OutputFormat::json ? to_json(report) : render_text(report));
  int failed = 0;
  for (const auto& c : report.cells) failed += c.model ? 0 : 1;
  if (failed) {
    err << "error: " << failed << " of " << report.cells.size() << " models could not be fitted\n";
    return kDomainError;
  }
  return kOk;
}

int cmd_fit(const std::string& manifest, const Config& cfg, const std::string& report_json, Output& sink,
            std::ostream& err) {
  const auto table = load_table(manifest, cfg);
  if (table.rows.size() < 3) {
    throw Error(ErrorCode::insufficient_data, "model fitting needs n >= 3 rows, manifest has " +
                                                  std::to_string(table.rows.size()));
  }
  const auto report = build_report(table, cfg.stepwise());
  if (!report_json.empty()) Output(report_json, err).write(to_json(report));
  return emit_report(report, cfg, sink, err);
}

int cmd_report(const std::string& path, const Config& cfg, Output& sink, std::ostream& err) {
  return emit_report(report_from_json(read_file(path)), cfg, sink, err);
}

struct SynthArgs {
  std::uint64_t seed = 42;
  std::size_t subjects = 7;
  std::size_t tasks = 2;
  std::string truth_path;
  std::string out_dir = "synthetic-study";
};

int cmd_synth(const SynthArgs& a, const Config& cfg, std::ostream& out) {
  StudyConfig sc;
  sc.n_subjects = a.subjects;
  sc.tasks_per_subject = a.tasks;
  sc.window_len_s = cfg.window_len_s;
  if (!a.truth_path.empty()) sc.truth = truth_from_json(read_file(a.truth_path));
  const auto study = generate_study(sc, a.seed);
  write_study(study, a.out_dir);
  out << "wrote " << study.records.size() << " sessions (" << a.subjects << " subjects x " << a.tasks
      << " tasks, seed " << a.seed << ") to " << a.out_dir << '\n';
  return kOk;
}

const std::map<std::string, RestAggregation> kRestAggNames = {{"mean", RestAggregation::mean},
                                                              {"last", RestAggregation::last}};
const std::map<std::string, Selection> kSelectionNames = {{"forward", Selection::forward},
                                                          {"forward_backward", Selection::forward_backward}};
const std::map<std::string, OutputFormat> kFormatNames = {
    {"text", OutputFormat::text}, {"json", OutputFormat::json}, {"csv", OutputFormat::csv}};

template <typename T>
std::vector<std::string> keys(const std::map<std::string, T>& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cognitive-load metrics from nasal/forehead skin temperature, with stepwise regression "
               "against NASA-TLX subscales.",
               "nstload"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 validation or domain error, 2 I/O error.");

  Config cfg;
  std::string manifest;
  std::string out_path;
  std::string report_json;
  std::pair<double, double> band{cfg.band.low_c, cfg.band.high_c};
  SynthArgs synth;
  std::string format_name, rest_agg_name, selection_name;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--output-format", format_name, "text, json, or csv")
        ->check(CLI::IsMember(keys(kFormatNames), CLI::ignore_case));
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out_path, "Write output to this file"); };
  auto add_band = [&](CLI::App* sub) {
    sub->add_option("--temp-band", band, "Plausible temperature range LOW,HIGH in degC")->delimiter(',');
  };
  auto add_signal = [&](CLI::App* sub) {
    sub->add_option("manifest", manifest, "Session manifest JSON")->required();
    sub->add_option("--window-secs", cfg.window_len_s, "Metric window length in seconds")->capture_default_str();
    sub->add_option("--rest-agg", rest_agg_name, "Rest baseline aggregation: mean or last")
        ->check(CLI::IsMember(keys(kRestAggNames), CLI::ignore_case));
    add_band(sub);
    add_format(sub);
    add_out(sub);
  };
  auto add_stepwise = [&](CLI::App* sub) {
    sub->add_option("--tolerance-threshold", cfg.tolerance_threshold,
                    "Minimum tolerance for a candidate to enter a model")
        ->capture_default_str();
    sub->add_flag("--paper-literal-tolerance", cfg.paper_literal_tolerance,
                  "Reject any candidate with tolerance below 1 (numerically)");
    sub->add_option("--selection", selection_name, "forward or forward_backward")
        ->check(CLI::IsMember(keys(kSelectionNames), CLI::ignore_case));
    sub->add_option("--min-improvement", cfg.min_improvement, "Required adjusted R^2 gain per step")
        ->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check a manifest and its sample files");
  validate->add_option("manifest", manifest, "Session manifest JSON")->required();
  add_band(validate);
  add_format(validate);

  auto* metrics = app.add_subcommand("metrics", "Per-task WMAX, WAVE, WSUM and rest NST");
  add_signal(metrics);

  auto* features = app.add_subcommand("features", "Regression-ready feature table");
  add_signal(features);

  auto* fit = app.add_subcommand("fit", "Stepwise models for every TLX subscale");
  add_signal(fit);
  add_stepwise(fit);
  fit->add_option("--report-json", report_json, "Also save the report JSON to this file");

  auto* report = app.add_subcommand("report", "Render a saved report JSON");
  report->add_option("report", report_json, "Report JSON written by fit")->required();
  add_format(report);
  add_out(report);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic study with known ground truth");
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--subjects", synth.subjects, "Number of subjects")->capture_default_str();
  synth_cmd->add_option("--tasks", synth.tasks, "Tasks per subject")->capture_default_str();
  synth_cmd->add_option("--truth", synth.truth_path, "JSON file overriding the true TLX relations");
  synth_cmd->add_option("--window-secs", cfg.window_len_s, "Metric window length in seconds")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kDomainError;
  }

  cfg.band = {band.first, band.second};
  if (!format_name.empty()) cfg.output_format = kFormatNames.at(format_name);
  if (!rest_agg_name.empty()) cfg.rest_agg = kRestAggNames.at(rest_agg_name);
  if (!selection_name.empty()) cfg.selection = kSelectionNames.at(selection_name);
  Output sink(out_path, out);
  try {
    cfg.validate();
    if (*validate) return cmd_validate(manifest, cfg, out);
    if (*metrics) return cmd_metrics(manifest, cfg, sink);
    if (*features) return cmd_features(manifest, cfg, sink);
    if (*fit) return cmd_fit(manifest, cfg, report_json, sink, err);
    if (*report) return cmd_report(report_json, cfg, sink, err);
    if (*synth_cmd) return cmd_synth(synth, cfg, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::io ? kIoError : kDomainError;
  }
  return kDomainError;
}

}  // namespace nstload::cli
