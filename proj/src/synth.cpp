#include "nstload/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "nstload/rng.hpp"

namespace nstload {

using nlohmann::json;

std::string_view to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::planning: return "planning";
    case PhaseKind::typing: return "typing";
    case PhaseKind::debugging: return "debugging";
  }
  return "unknown";
}

double LoadProfile::task_duration_s() const {
  double total = 0.0;
  for (const auto& p : phases) total += p.duration_s;
  return total;
}

void LoadProfile::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::invalid_argument, "load profile: " + msg); };
  if (phases.empty()) bad("needs at least one phase");
  for (const auto& p : phases) {
    if (!(p.duration_s > 0.0) || !std::isfinite(p.duration_s)) bad("phase durations must be positive");
    if (!(p.load_level >= 0.0 && p.load_level <= 1.0)) bad("load levels must lie in [0, 1]");
  }
  if (!(rest_load_level >= 0.0 && rest_load_level <= 1.0)) bad("rest load level must lie in [0, 1]");
  if (!(rest_duration_s > 0.0)) bad("rest duration must be positive");
  if (!(noise_sd_c >= 0.0) || !(forehead_noise_ratio >= 0.0)) bad("noise must be non-negative");
  if (!(time_constant_s >= 0.0)) bad("time constant must be non-negative");
  if (!std::isfinite(subject_baseline_nst_c) || !std::isfinite(load_gain_c) || !std::isfinite(forehead_c)) {
    bad("baseline, gain and forehead temperature must be finite");
  }
}

namespace {

// Piecewise-constant load target over the whole session timeline.
class LoadSchedule {
 public:
  explicit LoadSchedule(const LoadProfile& profile) {
    double t = profile.rest_duration_s;
    bounds_.push_back(t);
    levels_.push_back(profile.rest_load_level);
    for (const auto& p : profile.phases) {
      t += p.duration_s;
      bounds_.push_back(t);
      levels_.push_back(p.load_level);
    }
  }

  // Segment index active at time t (the final phase extends past its end).
  std::size_t segment(double t) const {
    auto it = std::upper_bound(bounds_.begin(), bounds_.end(), t);
    return std::min<std::size_t>(static_cast<std::size_t>(it - bounds_.begin()), levels_.size() - 1);
  }

  double level(std::size_t seg) const { return levels_[seg]; }
  double end_of(std::size_t seg) const { return bounds_[seg]; }
  std::size_t segments() const { return levels_.size(); }

 private:
  std::vector<double> bounds_;  // end time of each segment
  std::vector<double> levels_;
};

double relax(double state, double target, double dt, double tau) {
  if (tau <= 0.0) return target;
  return target + (state - target) * std::exp(-dt / tau);
}

double round_to(double v, int decimals) {
  if (decimals < 0) return v;
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

}  // namespace

SyntheticSession generate_session(const LoadProfile& profile, double sample_period_s, std::uint64_t seed,
                                  double window_len_s) {
  profile.validate();
  if (!(sample_period_s > 0.0) || !std::isfinite(sample_period_s)) {
    throw Error(ErrorCode::invalid_argument, "sample period must be positive");
  }
  const double rest_end = profile.rest_duration_s;
  const double end = rest_end + profile.task_duration_s();
  if (std::ceil(rest_end / sample_period_s) * sample_period_s >= end) {
    throw Error(ErrorCode::invalid_argument, "sample period leaves the task interval without samples");
  }

  const LoadSchedule schedule(profile);
  Rng rng(seed);
  SyntheticSession out;
  out.seed = seed;
  out.recording.rest_interval = {0.0, rest_end};
  out.recording.task_interval = {rest_end, end};

  std::vector<TemperatureSample> clean;
  double state = profile.rest_load_level;
  double t_prev = 0.0;
  const double forehead_sd = profile.noise_sd_c * profile.forehead_noise_ratio;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * sample_period_s;
    if (t >= end) break;
    // Integrate the lag exactly across any segment boundaries since t_prev.
    double cursor = t_prev;
    while (cursor < t) {
      const auto seg = schedule.segment(cursor);
      const double stop = seg + 1 < schedule.segments() ? std::min(t, schedule.end_of(seg)) : t;
      state = relax(state, schedule.level(seg), stop - cursor, profile.time_constant_s);
      cursor = stop;
    }
    t_prev = t;

    const double nasal_clean = profile.forehead_c + profile.subject_baseline_nst_c - profile.load_gain_c * state;
    const double forehead = profile.forehead_c + rng.normal(0.0, forehead_sd);
    const double nasal = nasal_clean + rng.normal(0.0, profile.noise_sd_c);
    out.recording.samples.push_back(
        {t, round_to(forehead, profile.decimals), round_to(nasal, profile.decimals)});
    clean.push_back({t, profile.forehead_c, nasal_clean});
  }

  SessionRecording truth_rec = out.recording;
  truth_rec.samples = std::move(clean);
  out.true_wnst = wnst_series(window_nst(truth_rec, truth_rec.task_interval, window_len_s),
                              rest_baseline(truth_rec, RestAggregation::mean));
  return out;
}

TruthRelations default_truth() {
  TruthRelations t{};
  auto set = [&](Subscale s, double intercept, Feature f, double c, double time_c) {
    auto& r = t[static_cast<std::size_t>(s)];
    r.intercept = intercept;
    r[f] = c;
    r[Feature::log_time] = time_c;
    r.noise_rel_sd = 0.5;
  };
  set(Subscale::mental_demand, 55.0, Feature::wmax, 25.0, -12.0);
  set(Subscale::own_performance, 62.0, Feature::wsum, 4.0, -15.0);
  set(Subscale::effort, 70.0, Feature::wave, 20.0, -20.0);
  set(Subscale::frustration, 35.0, Feature::wmax, 30.0, -6.0);
  return t;
}

TruthRelations truth_from_json(const std::string& text) {
  TruthRelations truth = default_truth();
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw Error(ErrorCode::validation, "truth JSON must be an object");
    for (const auto& [key, value] : doc.items()) {
      auto s = parse_subscale(key);
      if (!s) throw Error(ErrorCode::validation, "truth JSON: unknown subscale '" + key + "'");
      TruthRelation r;
      for (const auto& [field, v] : value.items()) {
        if (field == "intercept") r.intercept = v.get<double>();
        else if (field == "noise_rel_sd") r.noise_rel_sd = v.get<double>();
        else if (auto f = parse_feature(field)) r[*f] = v.get<double>();
        else throw Error(ErrorCode::validation, "truth JSON: unknown field '" + field + "' for " + key);
      }
      if (!(r.noise_rel_sd >= 0.0)) throw Error(ErrorCode::validation, "truth JSON: noise_rel_sd must be >= 0");
      truth[static_cast<std::size_t>(*s)] = r;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, std::string("truth JSON: ") + e.what());
  }
  return truth;
}

namespace {

json truth_json(const TruthRelations& truth) {
  json doc = json::object();
  for (auto s : kSubscales) {
    const auto& r = truth[static_cast<std::size_t>(s)];
    json rel = {{"intercept", r.intercept}, {"noise_rel_sd", r.noise_rel_sd}};
    for (auto f : kAllFeatures) rel[std::string(to_string(f))] = r[f];
    doc[std::string(to_string(s))] = rel;
  }
  return doc;
}

}  // namespace

std::string truth_to_json(const TruthRelations& truth) { return truth_json(truth).dump(2) + "\n"; }

void StudyConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::invalid_argument, "study config: " + msg); };
  if (n_subjects < 1 || tasks_per_subject < 1) bad("need at least one subject and one task");
  if (!(sample_period_s > 0.0) || !(window_len_s > 0.0) || !(rest_duration_s > 0.0)) {
    bad("periods and durations must be positive");
  }
  if (!(easy_minutes > 0.0) || !(difficult_minutes > 0.0) || !(reference_minutes > 0.0)) {
    bad("task minutes must be positive");
  }
  if (!(duration_log_sd >= 0.0) || !(phase_load_sd >= 0.0) || !(noise_sd_c >= 0.0)) bad("spreads must be >= 0");
  if (!(relief_min <= relief_max) || !(baseline_nst_min_c <= baseline_nst_max_c)) bad("ranges must be ordered");
  for (double f : phase_fractions) {
    if (!(f > 0.0)) bad("phase fractions must be positive");
  }
}

Study generate_study(const StudyConfig& config, std::uint64_t seed) {
  config.validate();
  Study study;
  study.config = config;
  study.seed = seed;

  constexpr std::array<PhaseKind, 3> kinds = {PhaseKind::planning, PhaseKind::typing, PhaseKind::debugging};
  const double fraction_total = config.phase_fractions[0] + config.phase_fractions[1] + config.phase_fractions[2];

  for (std::size_t s = 0; s < config.n_subjects; ++s) {
    const std::uint64_t subject_seed = derive_seed(seed, s + 1);
    Rng subject_rng(subject_seed);
    const double gain = config.load_gain_c * (1.0 + subject_rng.uniform(-config.gain_spread, config.gain_spread));
    const double baseline = subject_rng.uniform(config.baseline_nst_min_c, config.baseline_nst_max_c);
    const bool easy_first = subject_rng.uniform() < 0.5;

    char subject_id[16];
    std::snprintf(subject_id, sizeof subject_id, "S%02zu", s + 1);

    for (std::size_t k = 0; k < config.tasks_per_subject; ++k) {
      Rng rng(derive_seed(subject_seed, 1000 + k));
      const bool easy = (k % 2 == 0) == easy_first;
      const double minutes =
          (easy ? config.easy_minutes : config.difficult_minutes) * std::exp(rng.normal(0.0, config.duration_log_sd));
      const double load = config.base_load + config.duration_load_slope * std::log(minutes / config.reference_minutes);
      const double relief = rng.uniform(config.relief_min, config.relief_max);
      const std::array<double, 3> levels = {load + rng.normal(0.0, config.phase_load_sd), load - relief,
                                            load + rng.normal(0.0, config.phase_load_sd)};

      LoadProfile profile;
      profile.noise_sd_c = config.noise_sd_c;
      profile.subject_baseline_nst_c = baseline;
      profile.rest_duration_s = config.rest_duration_s;
      profile.rest_load_level = config.rest_load_level;
      profile.load_gain_c = gain;
      profile.time_constant_s = config.time_constant_s;
      profile.forehead_c = config.forehead_c;
      const double task_s = minutes * 60.0;
      for (std::size_t i = 0; i < 3; ++i) {
        profile.phases.push_back(
            {kinds[i], task_s * config.phase_fractions[i] / fraction_total, std::clamp(levels[i], 0.0, 1.0)});
      }

      auto session = generate_session(profile, config.sample_period_s, rng.next_u64(), config.window_len_s);

      TaskRecord rec;
      rec.subject_id = subject_id;
      rec.task_id = "T" + std::to_string(k + 1);
      rec.difficulty = easy ? Difficulty::easy : Difficulty::difficult;
      rec.task_time_min = minutes;
      rec.samples_csv = "samples/" + rec.subject_id + "_" + rec.task_id + ".csv";
      rec.recording = std::move(session.recording);
      rec.recording.subject_id = rec.subject_id;
      rec.recording.task_id = rec.task_id;
      study.records.push_back(std::move(rec));
      study.true_wnst.push_back(std::move(session.true_wnst));
    }
  }

  FeatureOptions opts;
  opts.window_len_s = config.window_len_s;
  study.table = build_features(study.records, opts);

  const auto n = static_cast<Eigen::Index>(study.table.rows.size());
  for (auto target : kSubscales) {
    const auto& rel = config.truth[static_cast<std::size_t>(target)];
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, rel.intercept);
    for (auto f : kAllFeatures) {
      if (rel[f] != 0.0) y += rel[f] * feature_column(study.table, f);
    }
    const double noise_sd = rel.noise_rel_sd * sample_sd(y);
    Rng noise(derive_seed(seed, 0x544c5800ULL + static_cast<std::uint64_t>(target)));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = std::clamp(y(i) + noise.normal(0.0, noise_sd), kTlxMin, kTlxMax);
      study.records[static_cast<std::size_t>(i)].tlx[target] = v;
      study.table.rows[static_cast<std::size_t>(i)].targets[target] = v;
    }
  }
  return study;
}

void write_study(const Study& study, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "samples", ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + (out_dir / "samples").string() + ": " + ec.message());

  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::io, "cannot write " + p.string());
    return f;
  };

  for (const auto& rec : study.records) {
    auto f = open(out_dir / rec.samples_csv);
    write_samples_csv(f, rec.recording.samples);
    if (!f) throw Error(ErrorCode::io, "write failed for " + rec.samples_csv);
  }
  {
    auto f = open(out_dir / "manifest.json");
    write_manifest(f, study.records);
    if (!f) throw Error(ErrorCode::io, "write failed for manifest.json");
  }

  json sessions = json::array();
  for (std::size_t i = 0; i < study.records.size(); ++i) {
    json traj = json::array();
    for (const auto& p : study.true_wnst[i].values) traj.push_back(p.wnst_c);
    sessions.push_back({{"subject_id", study.records[i].subject_id},
                        {"task_id", study.records[i].task_id},
                        {"true_rest_nst_c", study.true_wnst[i].rest_nst_c},
                        {"true_wnst", traj}});
  }
  json doc = {{"seed", study.seed}, {"relations", truth_json(study.config.truth)}, {"sessions", sessions}};
  auto f = open(out_dir / "truth.json");
  f << doc.dump(2) << '\n';
  if (!f) throw Error(ErrorCode::io, "write failed for truth.json");
}

}  // namespace nstload
