#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nstload/features.hpp"
#include "nstload/metrics.hpp"
#include "nstload/regress.hpp"
#include "nstload/signal.hpp"

namespace nstload {

enum class PhaseKind { planning, typing, debugging };

std::string_view to_string(PhaseKind k);

struct Phase {
  PhaseKind kind = PhaseKind::planning;
  double duration_s = 0.0;
  /// 0 = fully relaxed, 1 = maximal sympathetic activation.
  double load_level = 0.0;
};

/// Load trajectory of one session. Nasal temperature drops by
/// `load_gain_c * load` below its relaxed level and follows the target with a
/// first-order lag; forehead temperature stays put apart from noise.
struct LoadProfile {
  std::vector<Phase> phases;
  double noise_sd_c = 0.05;
  double subject_baseline_nst_c = 1.5;
  double rest_duration_s = 180.0;
  /// Activation during the pre-task rest (anticipation). Task WNST is
  /// positive when the task load sits below this level.
  double rest_load_level = 0.9;
  double load_gain_c = 1.25;
  double time_constant_s = 60.0;
  double forehead_c = 34.0;
  /// Forehead noise as a fraction of `noise_sd_c`.
  double forehead_noise_ratio = 0.3;
  /// Readings are rounded to this many decimals; negative keeps full precision.
  int decimals = 2;

  double task_duration_s() const;
  void validate() const;
};

struct SyntheticSession {
  SessionRecording recording;
  /// WNST computed from the noise-free, unrounded trajectory.
  WnstSeries true_wnst;
  std::uint64_t seed = 0;
};

SyntheticSession generate_session(const LoadProfile& profile, double sample_period_s, std::uint64_t seed,
                                  double window_len_s = 120.0);

/// y = intercept + sum(coefficient * feature) + noise, clipped to the TLX
/// range. Noise sd is `noise_rel_sd` times the sample sd of the noiseless y
/// across the study.
struct TruthRelation {
  double intercept = 50.0;
  std::array<double, 4> coefficients{};  // indexed like kAllFeatures
  double noise_rel_sd = 0.0;

  double& operator[](Feature f) { return coefficients[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const { return coefficients[static_cast<std::size_t>(f)]; }
};

using TruthRelations = std::array<TruthRelation, 4>;  // indexed like kSubscales

/// Scores rise with the WNST summaries and fall with log task time.
TruthRelations default_truth();

/// Reads {"mental_demand": {"intercept": .., "wmax": .., ..., "noise_rel_sd": ..}, ...}.
/// Subscales not mentioned keep their defaults.
TruthRelations truth_from_json(const std::string& text);
std::string truth_to_json(const TruthRelations& truth);

struct StudyConfig {
  std::size_t n_subjects = 7;
  std::size_t tasks_per_subject = 2;
  double sample_period_s = 10.0;
  double window_len_s = 120.0;
  double rest_duration_s = 180.0;

  double easy_minutes = 6.9;
  double difficult_minutes = 13.1;
  double duration_log_sd = 0.15;

  /// Task load = base_load + duration_load_slope * ln(T / reference_minutes):
  /// long sessions settle at lower arousal.
  double base_load = 0.45;
  double duration_load_slope = -0.2;
  double reference_minutes = 9.5;
  double phase_load_sd = 0.05;
  /// Typing sits below the task load by a uniform draw from this range.
  double relief_min = 0.05;
  double relief_max = 0.6;
  std::array<double, 3> phase_fractions = {0.25, 0.45, 0.30};

  double rest_load_level = 0.9;
  double load_gain_c = 1.25;
  double gain_spread = 0.3;
  double baseline_nst_min_c = 1.0;
  double baseline_nst_max_c = 2.0;
  double noise_sd_c = 0.05;
  double time_constant_s = 60.0;
  double forehead_c = 34.0;

  TruthRelations truth = default_truth();

  void validate() const;
};

struct Study {
  std::vector<TaskRecord> records;
  FeatureTable table;
  std::vector<WnstSeries> true_wnst;
  StudyConfig config;
  std::uint64_t seed = 0;
};

Study generate_study(const StudyConfig& config, std::uint64_t seed);

/// Writes manifest.json, samples/<subject>_<task>.csv and truth.json.
void write_study(const Study& study, const std::filesystem::path& out_dir);

}  // namespace nstload
