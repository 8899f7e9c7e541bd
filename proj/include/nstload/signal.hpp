#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nstload {

/// Accepted skin-temperature range. Readings outside it are almost always a
/// unit or channel mix-up rather than physiology.
struct TemperatureBand {
  double low_c = 20.0;
  double high_c = 45.0;

  bool contains(double t) const { return t >= low_c && t <= high_c; }
};

struct TemperatureSample {
  double time_s = 0.0;
  double forehead_c = 0.0;
  double nasal_c = 0.0;
};

/// Half-open time interval [start_s, end_s).
struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;

  bool contains(double t) const { return t >= start_s && t < end_s; }
  double length() const { return end_s - start_s; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct SessionRecording {
  std::string subject_id;
  std::string task_id;
  std::vector<TemperatureSample> samples;
  Interval rest_interval;
  Interval task_interval;

  /// Throws Error(validation / invalid_sample) naming the first violation.
  void validate(const TemperatureBand& band = {}) const;

  /// Collects every violation instead of stopping at the first.
  std::vector<std::string> violations(const TemperatureBand& band = {}) const;
};

struct NstPoint {
  double window_end_s = 0.0;
  double nst_c = 0.0;
  std::size_t sample_count = 0;

  friend bool operator==(const NstPoint&, const NstPoint&) = default;
};

struct NstSeries {
  double window_len_s = 120.0;
  std::vector<NstPoint> values;
};

enum class RestAggregation { mean, last };

/// Nasal minus forehead skin temperature. Positive when the nose is warmer,
/// i.e. when sympathetic activity is low.
double nst(double forehead_c, double nasal_c);

inline double nst(const TemperatureSample& s) { return nst(s.forehead_c, s.nasal_c); }

/// Mean NST per consecutive window of `window_len_s` starting at
/// `interval.start_s`. A trailing partial window is kept when it holds a
/// sample; any other empty window is a gap error.
NstSeries window_nst(std::span<const TemperatureSample> samples, const Interval& interval,
                     double window_len_s);

inline NstSeries window_nst(const SessionRecording& rec, const Interval& interval,
                            double window_len_s) {
  return window_nst(rec.samples, interval, window_len_s);
}

double rest_baseline(const SessionRecording& rec,
                     RestAggregation agg = RestAggregation::mean);

/// Reads `time_s,forehead_c,nasal_c` CSV. Errors name the file and line.
std::vector<TemperatureSample> read_samples_csv(const std::filesystem::path& path,
                                                const TemperatureBand& band = {});
std::vector<TemperatureSample> parse_samples_csv(std::istream& in, const std::string& origin,
                                                 const TemperatureBand& band = {});

void write_samples_csv(std::ostream& out, std::span<const TemperatureSample> samples);

}  // namespace nstload
