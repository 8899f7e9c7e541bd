#include "nstload/features.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "detail/text.hpp"

namespace nstload {

using nlohmann::json;

std::string_view to_string(Subscale s) {
  switch (s) {
    case Subscale::mental_demand: return "mental_demand";
    case Subscale::own_performance: return "own_performance";
    case Subscale::effort: return "effort";
    case Subscale::frustration: return "frustration";
  }
  return "unknown";
}

std::optional<Subscale> parse_subscale(std::string_view name) {
  for (auto s : kSubscales) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

double TlxResponse::operator[](Subscale s) const {
  return const_cast<TlxResponse&>(*this)[s];
}

double& TlxResponse::operator[](Subscale s) {
  switch (s) {
    case Subscale::mental_demand: return mental_demand;
    case Subscale::own_performance: return own_performance;
    case Subscale::effort: return effort;
    case Subscale::frustration: return frustration;
  }
  return mental_demand;
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::difficult: return "difficult";
    case Difficulty::other: return "other";
  }
  return "other";
}

std::optional<Difficulty> parse_difficulty(std::string_view name) {
  if (name == "easy") return Difficulty::easy;
  if (name == "difficult") return Difficulty::difficult;
  if (name == "other") return Difficulty::other;
  return std::nullopt;
}

std::string config_digest(const FeatureOptions& opts) {
  std::string canon = "window_len_s=" + detail::format_double(opts.window_len_s) +
                      ";rest_agg=" + (opts.rest_agg == RestAggregation::mean ? "mean" : "last") +
                      ";band=" + detail::format_double(opts.band.low_c) + "," +
                      detail::format_double(opts.band.high_c);
  // FNV-1a, 64 bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool ManifestScan::has_io_failure() const {
  for (const auto& d : diagnostics) {
    if (d.code == ErrorCode::io) return true;
  }
  return false;
}

namespace {

// Collects field errors for one manifest entry.
class EntryReader {
 public:
  EntryReader(const json& entry, std::string location, std::vector<Diagnostic>& sink)
      : entry_(entry), location_(std::move(location)), sink_(sink) {}

  void fail(const std::string& field, const std::string& msg, ErrorCode code = ErrorCode::validation) {
    sink_.push_back({code, location_ + (field.empty() ? "" : "." + field), msg});
    failed_ = true;
  }

  std::string text(const char* key) {
    auto it = entry_.find(key);
    if (it == entry_.end() || !it->is_string()) {
      fail(key, "missing or not a string");
      return {};
    }
    return it->get<std::string>();
  }

  double number(const json& obj, const std::string& field, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
      fail(field, "missing or not a number");
      return 0.0;
    }
    double v = it->get<double>();
    if (!std::isfinite(v)) fail(field, "not finite");
    return v;
  }

  std::optional<Interval> interval(const char* key) {
    auto it = entry_.find(key);
    if (it == entry_.end() || !it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
        !(*it)[1].is_number()) {
      fail(key, "expected [start_s, end_s]");
      return std::nullopt;
    }
    return Interval{(*it)[0].get<double>(), (*it)[1].get<double>()};
  }

  void relocate(std::string location) { location_ = std::move(location); }
  bool failed() const { return failed_; }

 private:
  const json& entry_;
  std::string location_;
  std::vector<Diagnostic>& sink_;
  bool failed_ = false;
};

}  // namespace

ManifestScan scan_manifest(const std::filesystem::path& path, const TemperatureBand& band) {
  ManifestScan scan;
  auto& diags = scan.diagnostics;
  const std::string where = path.string();

  std::ifstream in(path);
  if (!in) {
    diags.push_back({ErrorCode::io, where, "cannot open manifest"});
    return scan;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    diags.push_back({ErrorCode::validation, where, std::string("malformed JSON: ") + e.what()});
    return scan;
  }
  if (!doc.is_object() || !doc.contains("sessions") || !doc["sessions"].is_array()) {
    diags.push_back({ErrorCode::validation, where, "expected an object with a 'sessions' array"});
    return scan;
  }

  const auto base_dir = path.parent_path();
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t index = 0;
  for (const auto& entry : doc["sessions"]) {
    std::string loc = where + ": sessions[" + std::to_string(index++) + "]";
    if (!entry.is_object()) {
      diags.push_back({ErrorCode::validation, loc, "session entry is not an object"});
      continue;
    }
    EntryReader rd(entry, loc, diags);
    TaskRecord rec;
    rec.subject_id = rd.text("subject_id");
    rec.task_id = rd.text("task_id");
    if (!rec.subject_id.empty() || !rec.task_id.empty()) {
      // Re-anchor the location on the session identity for readability.
      loc += " (" + rec.subject_id + "/" + rec.task_id + ")";
      rd.relocate(loc);
    }

    auto diff = parse_difficulty(rd.text("difficulty"));
    if (!diff) rd.fail("difficulty", "expected easy, difficult, or other");
    else rec.difficulty = *diff;

    rec.task_time_min = rd.number(entry, "task_time_min", "task_time_min");
    if (!(rec.task_time_min > 0.0)) {
      rd.fail("task_time_min", "task time must be positive (log transform), got " +
                                   detail::format_double(rec.task_time_min));
    }

    auto tlx_it = entry.find("tlx");
    if (tlx_it == entry.end() || !tlx_it->is_object()) {
      rd.fail("tlx", "missing TLX object");
    } else {
      for (auto s : kSubscales) {
        const std::string key(to_string(s));
        double v = rd.number(*tlx_it, "tlx." + key, key.c_str());
        if (v < kTlxMin || v > kTlxMax) {
          rd.fail("tlx." + key, "score " + detail::format_double(v) + " outside [0, 100]");
        }
        rec.tlx[s] = v;
      }
    }

    rec.recording.subject_id = rec.subject_id;
    rec.recording.task_id = rec.task_id;
    auto rest = rd.interval("rest_interval_s");
    auto task = rd.interval("task_interval_s");
    bool structure_ok = rest && task;
    if (rest) rec.recording.rest_interval = *rest;
    if (task) rec.recording.task_interval = *task;

    rec.samples_csv = rd.text("samples_csv");
    if (!rec.samples_csv.empty()) {
      std::filesystem::path csv = rec.samples_csv;
      if (csv.is_relative()) csv = base_dir / csv;
      try {
        rec.recording.samples = read_samples_csv(csv, band);
      } catch (const Error& e) {
        rd.fail("samples_csv", e.what(), e.code());
        structure_ok = false;
      }
    } else {
      structure_ok = false;
    }

    if (structure_ok) {
      for (auto& v : rec.recording.violations(band)) rd.fail("", v);
    }
    if (!seen.insert({rec.subject_id, rec.task_id}).second) {
      rd.fail("", "duplicate (subject_id, task_id) pair");
    }
    if (!rd.failed()) scan.records.push_back(std::move(rec));
  }
  return scan;
}

std::vector<TaskRecord> load_manifest(const std::filesystem::path& path, const TemperatureBand& band) {
  auto scan = scan_manifest(path, band);
  if (!scan.ok()) {
    std::string msg;
    for (const auto& d : scan.diagnostics) {
      if (!msg.empty()) msg += '\n';
      msg += d.location + ": " + d.message;
    }
    throw Error(scan.has_io_failure() ? ErrorCode::io : ErrorCode::validation, msg);
  }
  return std::move(scan.records);
}

void write_manifest(std::ostream& out, std::span<const TaskRecord> records) {
  json sessions = json::array();
  for (const auto& r : records) {
    json tlx = json::object();
    for (auto s : kSubscales) tlx[std::string(to_string(s))] = r.tlx[s];
    sessions.push_back({
        {"subject_id", r.subject_id},
        {"task_id", r.task_id},
        {"difficulty", std::string(to_string(r.difficulty))},
        {"task_time_min", r.task_time_min},
        {"samples_csv", r.samples_csv},
        {"rest_interval_s", {r.recording.rest_interval.start_s, r.recording.rest_interval.end_s}},
        {"task_interval_s", {r.recording.task_interval.start_s, r.recording.task_interval.end_s}},
        {"tlx", tlx},
    });
  }
  json doc = {{"sessions", sessions}};
  out << doc.dump(2) << '\n';
}

FeatureRow build_feature_row(const TaskRecord& record, const FeatureOptions& opts) {
  try {
    if (!(record.task_time_min > 0.0) || !std::isfinite(record.task_time_min)) {
      throw Error(ErrorCode::validation, "task time must be positive");
    }
    const auto& rec = record.recording;
    const double rest = rest_baseline(rec, opts.rest_agg);
    const auto metrics = summarize(wnst_series(window_nst(rec, rec.task_interval, opts.window_len_s), rest));
    FeatureRow row;
    row.subject_id = record.subject_id;
    row.task_id = record.task_id;
    row.wmax = metrics.wmax;
    row.wave = metrics.wave;
    row.wsum = metrics.wsum;
    row.n_windows = metrics.n_windows;
    row.rest_nst_c = rest;
    row.log_time = std::log(record.task_time_min);
    row.targets = record.tlx;
    return row;
  } catch (const Error& e) {
    throw Error(e.code(), record.subject_id + "/" + record.task_id + ": " + e.what());
  }
}

FeatureTable build_features(std::span<const TaskRecord> records, const FeatureOptions& opts) {
  FeatureTable table;
  table.config_digest = config_digest(opts);
  table.rows.reserve(records.size());
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    if (!seen.insert({r.subject_id, r.task_id}).second) {
      throw Error(ErrorCode::validation,
                  r.subject_id + "/" + r.task_id + ": duplicate (subject_id, task_id) pair");
    }
    table.rows.push_back(build_feature_row(r, opts));
  }
  return table;
}

void write_features_csv(std::ostream& out, const FeatureTable& table) {
  out << "subject_id,task_id,wmax,wave,wsum,log_time,mental_demand,own_performance,effort,frustration\n";
  using detail::format_double;
  for (const auto& r : table.rows) {
    out << r.subject_id << ',' << r.task_id << ',' << format_double(r.wmax) << ','
        << format_double(r.wave) << ',' << format_double(r.wsum) << ',' << format_double(r.log_time);
    for (auto s : kSubscales) out << ',' << format_double(r.targets[s]);
    out << '\n';
  }
}

}  // namespace nstload
