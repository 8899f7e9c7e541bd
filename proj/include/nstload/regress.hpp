#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nstload/features.hpp"
#include "nstload/ols.hpp"

namespace nstload {

/// Explanatory variables, in the fixed order used for tie-breaking.
enum class Feature { wmax, wave, wsum, log_time };

inline constexpr std::array<Feature, 4> kAllFeatures = {Feature::wmax, Feature::wave, Feature::wsum,
                                                        Feature::log_time};

std::string_view to_string(Feature f);
std::optional<Feature> parse_feature(std::string_view name);

/// The two model families: task time alone (benchmark) and task time plus
/// the three biometric summaries.
enum class CandidateMode { biometric_full, time_only };

std::string_view to_string(CandidateMode m);
std::optional<CandidateMode> parse_candidate_mode(std::string_view name);
std::span<const Feature> candidate_features(CandidateMode m);

enum class Selection { forward, forward_backward };

std::string_view to_string(Selection s);
std::optional<Selection> parse_selection(std::string_view name);

struct StepwiseConfig {
  double tolerance_threshold = 0.1;
  /// Reads the tolerance rule literally: only candidates with tolerance of
  /// (numerically) 1 are admitted.
  bool paper_literal_tolerance = false;
  Selection selection = Selection::forward;
  double min_improvement = 0.0;

  double effective_threshold() const { return paper_literal_tolerance ? 1.0 - 1e-9 : tolerance_threshold; }

  friend bool operator==(const StepwiseConfig&, const StepwiseConfig&) = default;
};

struct FittedModel {
  std::string target;
  CandidateMode mode = CandidateMode::biometric_full;
  std::vector<std::string> selected;
  double intercept = 0.0;
  /// Aligned with `selected`.
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_coefficients;
  /// Tolerance of each variable at the step it was admitted.
  Eigen::VectorXd tolerances;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::size_t n = 0;

  bool includes(std::string_view name) const;
  /// Index into `selected`, if present.
  std::optional<std::size_t> index_of(std::string_view name) const;

  friend bool operator==(const FittedModel& a, const FittedModel& b);
};

/// Forward selection on adjusted R^2 over the columns of `X`, in column
/// order. A candidate is admissible only if its tolerance against the
/// current selection is at least the configured threshold; the best
/// admissible candidate is added while it raises adjusted R^2 by more than
/// `min_improvement`. With `forward_backward`, after every addition any
/// variable whose removal raises adjusted R^2 by more than
/// `min_improvement` is dropped. Ties go to the earlier column.
FittedModel stepwise_fit(const Eigen::MatrixXd& X, std::span<const std::string> names,
                         const Eigen::VectorXd& y, const StepwiseConfig& config = {});

FittedModel stepwise_fit(const FeatureTable& table, Subscale target, CandidateMode mode,
                         const StepwiseConfig& config = {});

Eigen::VectorXd feature_column(const FeatureTable& table, Feature f);
Eigen::MatrixXd design_matrix(const FeatureTable& table, std::span<const Feature> features);
Eigen::VectorXd target_vector(const FeatureTable& table, Subscale target);

}  // namespace nstload
