#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nstload/error.hpp"
#include "nstload/metrics.hpp"
#include "nstload/signal.hpp"

namespace nstload {

/// The four NASA-TLX subscales that are analysed. Lower scores mean higher
/// experienced load in this encoding; values are stored as answered.
enum class Subscale { mental_demand, own_performance, effort, frustration };

inline constexpr std::array<Subscale, 4> kSubscales = {
    Subscale::mental_demand, Subscale::own_performance, Subscale::effort, Subscale::frustration};

std::string_view to_string(Subscale s);
std::optional<Subscale> parse_subscale(std::string_view name);

struct TlxResponse {
  double mental_demand = 0.0;
  double own_performance = 0.0;
  double effort = 0.0;
  double frustration = 0.0;

  double operator[](Subscale s) const;
  double& operator[](Subscale s);

  friend bool operator==(const TlxResponse&, const TlxResponse&) = default;
};

inline constexpr double kTlxMin = 0.0;
inline constexpr double kTlxMax = 100.0;

enum class Difficulty { easy, difficult, other };

std::string_view to_string(Difficulty d);
std::optional<Difficulty> parse_difficulty(std::string_view name);

struct TaskRecord {
  std::string subject_id;
  std::string task_id;
  Difficulty difficulty = Difficulty::other;
  double task_time_min = 0.0;
  /// Path as written in the manifest (relative paths resolve against the
  /// manifest's directory).
  std::string samples_csv;
  SessionRecording recording;
  TlxResponse tlx;
};

struct FeatureOptions {
  double window_len_s = 120.0;
  RestAggregation rest_agg = RestAggregation::mean;
  TemperatureBand band;
};

/// Stable 16-hex-digit digest of the options that affect feature values.
std::string config_digest(const FeatureOptions& opts);

struct FeatureRow {
  std::string subject_id;
  std::string task_id;
  double wmax = 0.0;
  double wave = 0.0;
  double wsum = 0.0;
  double log_time = 0.0;
  std::size_t n_windows = 0;
  double rest_nst_c = 0.0;
  TlxResponse targets;
};

struct FeatureTable {
  std::vector<FeatureRow> rows;
  std::string manifest_path;
  std::string config_digest;
};

struct Diagnostic {
  ErrorCode code = ErrorCode::validation;
  std::string location;
  std::string message;
};

struct ManifestScan {
  std::vector<TaskRecord> records;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
  bool has_io_failure() const;
};

/// Reads and validates a manifest, collecting every problem. Records are only
/// returned for sessions that passed every check.
ManifestScan scan_manifest(const std::filesystem::path& path, const TemperatureBand& band = {});

/// Like scan_manifest but throws on the first scan with diagnostics. The
/// thrown code is `io` when any file could not be read, else `validation`.
std::vector<TaskRecord> load_manifest(const std::filesystem::path& path,
                                      const TemperatureBand& band = {});

/// Writes the manifest JSON for `records`. Sample CSVs are not written here.
void write_manifest(std::ostream& out, std::span<const TaskRecord> records);

FeatureRow build_feature_row(const TaskRecord& record, const FeatureOptions& opts = {});

FeatureTable build_features(std::span<const TaskRecord> records, const FeatureOptions& opts = {});

void write_features_csv(std::ostream& out, const FeatureTable& table);

}  // namespace nstload
