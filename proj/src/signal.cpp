#include "nstload/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "detail/text.hpp"
#include "nstload/error.hpp"

namespace nstload {

double nst(double forehead_c, double nasal_c) {
  if (!std::isfinite(forehead_c) || !std::isfinite(nasal_c)) {
    throw Error(ErrorCode::invalid_sample, "non-finite temperature reading");
  }
  return nasal_c - forehead_c;
}

namespace {

std::string interval_str(const Interval& iv) {
  std::ostringstream os;
  os << '[' << iv.start_s << ", " << iv.end_s << ')';
  return os.str();
}

std::size_t count_in(std::span<const TemperatureSample> samples, const Interval& iv) {
  std::size_t n = 0;
  for (const auto& s : samples) n += iv.contains(s.time_s) ? 1 : 0;
  return n;
}

}  // namespace

std::vector<std::string> SessionRecording::violations(const TemperatureBand& band) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.time_s) || !std::isfinite(s.forehead_c) || !std::isfinite(s.nasal_c)) {
      out.push_back("sample " + std::to_string(i) + ": non-finite value");
      continue;
    }
    if (!band.contains(s.forehead_c)) {
      out.push_back("sample " + std::to_string(i) + ": forehead_c " +
                    detail::format_double(s.forehead_c) + " outside plausibility band");
    }
    if (!band.contains(s.nasal_c)) {
      out.push_back("sample " + std::to_string(i) + ": nasal_c " +
                    detail::format_double(s.nasal_c) + " outside plausibility band");
    }
    if (i > 0 && !(s.time_s > samples[i - 1].time_s)) {
      out.push_back("sample " + std::to_string(i) + ": time_s not strictly increasing");
    }
  }
  auto check_interval = [&](const Interval& iv, const char* name) {
    if (!std::isfinite(iv.start_s) || !std::isfinite(iv.end_s) || !(iv.end_s > iv.start_s)) {
      out.push_back(std::string(name) + " interval " + interval_str(iv) + " is empty");
      return false;
    }
    if (count_in(samples, iv) == 0) {
      out.push_back(std::string(name) + " interval " + interval_str(iv) + " contains no samples");
    }
    return true;
  };
  bool rest_ok = check_interval(rest_interval, "rest");
  bool task_ok = check_interval(task_interval, "task");
  if (rest_ok && task_ok && rest_interval.end_s > task_interval.start_s) {
    out.push_back("rest interval " + interval_str(rest_interval) + " overlaps or follows task interval " +
                  interval_str(task_interval));
  }
  return out;
}

void SessionRecording::validate(const TemperatureBand& band) const {
  auto v = violations(band);
  if (!v.empty()) {
    throw Error(ErrorCode::validation, subject_id + "/" + task_id + ": " + v.front());
  }
}

NstSeries window_nst(std::span<const TemperatureSample> samples, const Interval& interval,
                     double window_len_s) {
  if (!(window_len_s > 0.0) || !std::isfinite(window_len_s)) {
    throw Error(ErrorCode::invalid_argument, "window length must be positive and finite");
  }
  if (!(interval.end_s > interval.start_s)) {
    throw Error(ErrorCode::empty_interval, "interval " + interval_str(interval) + " is empty");
  }
  const double span_windows = interval.length() / window_len_s;
  if (span_windows > 1e7) {
    throw Error(ErrorCode::invalid_argument, "window length too small for interval");
  }
  const auto n_windows = static_cast<std::size_t>(std::ceil(span_windows));
  const bool last_partial = static_cast<double>(n_windows) * window_len_s > interval.length();

  std::vector<double> sums(n_windows, 0.0);
  std::vector<std::size_t> counts(n_windows, 0);
  std::size_t total = 0;
  for (const auto& s : samples) {
    if (!interval.contains(s.time_s)) continue;
    auto k = static_cast<std::size_t>(std::floor((s.time_s - interval.start_s) / window_len_s));
    if (k >= n_windows) k = n_windows - 1;
    sums[k] += nst(s);
    ++counts[k];
    ++total;
  }
  if (total == 0) {
    throw Error(ErrorCode::empty_interval,
                "interval " + interval_str(interval) + " contains no samples");
  }

  NstSeries out;
  out.window_len_s = window_len_s;
  out.values.reserve(n_windows);
  for (std::size_t k = 0; k < n_windows; ++k) {
    const double start = interval.start_s + static_cast<double>(k) * window_len_s;
    const double end = std::min(start + window_len_s, interval.end_s);
    if (counts[k] == 0) {
      if (k + 1 == n_windows && last_partial) break;
      throw Error(ErrorCode::gap, "window " + std::to_string(k) + " [" + detail::format_double(start) +
                                      ", " + detail::format_double(end) + ") has no samples");
    }
    out.values.push_back({end, sums[k] / static_cast<double>(counts[k]), counts[k]});
  }
  return out;
}

double rest_baseline(const SessionRecording& rec, RestAggregation agg) {
  double sum = 0.0;
  std::size_t n = 0;
  double last = 0.0;
  for (const auto& s : rec.samples) {
    if (!rec.rest_interval.contains(s.time_s)) continue;
    last = nst(s);
    sum += last;
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::empty_interval,
                "rest interval " + interval_str(rec.rest_interval) + " contains no samples");
  }
  return agg == RestAggregation::last ? last : sum / static_cast<double>(n);
}

std::vector<TemperatureSample> parse_samples_csv(std::istream& in, const std::string& origin,
                                                 const TemperatureBand& band) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::validation, origin + ":" + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  if (line_no == 0 || detail::trim(line).empty()) {
    line_no = 1;
    fail("missing header");
  }
  std::string_view header = detail::trim(line);
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  auto cols = detail::split(header, ',');
  if (cols.size() != 3 || cols[0] != "time_s" || cols[1] != "forehead_c" || cols[2] != "nasal_c") {
    fail("expected header 'time_s,forehead_c,nasal_c'");
  }

  std::vector<TemperatureSample> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, ',');
    if (fields.size() != 3) fail("expected 3 fields, got " + std::to_string(fields.size()));
    static constexpr const char* names[] = {"time_s", "forehead_c", "nasal_c"};
    double v[3];
    for (int i = 0; i < 3; ++i) {
      auto parsed = detail::parse_double(fields[i]);
      if (!parsed || !std::isfinite(*parsed)) {
        fail(std::string("field ") + names[i] + ": '" + std::string(fields[i]) + "' is not a finite number");
      }
      v[i] = *parsed;
    }
    if (!band.contains(v[1])) fail("field forehead_c: " + std::string(fields[1]) + " outside plausibility band");
    if (!band.contains(v[2])) fail("field nasal_c: " + std::string(fields[2]) + " outside plausibility band");
    if (!out.empty() && !(v[0] > out.back().time_s)) fail("time_s not strictly increasing");
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

std::vector<TemperatureSample> read_samples_csv(const std::filesystem::path& path,
                                                const TemperatureBand& band) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open sample file " + path.string());
  return parse_samples_csv(in, path.string(), band);
}

void write_samples_csv(std::ostream& out, std::span<const TemperatureSample> samples) {
  out << "time_s,forehead_c,nasal_c\n";
  for (const auto& s : samples) {
    out << detail::format_double(s.time_s) << ',' << detail::format_double(s.forehead_c) << ','
        << detail::format_double(s.nasal_c) << '\n';
  }
}

}  // namespace nstload
