#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nstload/features.hpp"
#include "nstload/regress.hpp"

namespace nstload {

/// One (target, candidate mode) fit. A failed fit keeps its slot and carries
/// the error text instead of a model.
struct ReportCell {
  Subscale target = Subscale::mental_demand;
  CandidateMode mode = CandidateMode::biometric_full;
  std::optional<FittedModel> model;
  std::string error;

  friend bool operator==(const ReportCell&, const ReportCell&) = default;
};

struct ModelReport {
  /// Time-only cells first, then the full candidate set; targets in
  /// kSubscales order within each mode.
  std::vector<ReportCell> cells;
  StepwiseConfig config;
  std::size_t n_rows = 0;
  std::string manifest_path;
  std::string config_digest;

  const ReportCell* find(Subscale target, CandidateMode mode) const;

  friend bool operator==(const ModelReport&, const ModelReport&) = default;
};

inline constexpr std::array<CandidateMode, 2> kReportModes = {CandidateMode::time_only,
                                                              CandidateMode::biometric_full};

/// Fits all four subscales under both candidate sets. Per-cell failures are
/// recorded in the cell; the rest of the report is still produced.
ModelReport build_report(const FeatureTable& table, const StepwiseConfig& config = {});

/// Two-decimal rendering used in the text tables; "-0.00" prints as "0.00".
std::string format_cell(double v);

/// Adjusted R^2 grid followed by one standardized-coefficient grid per
/// candidate set; "-" marks a variable left out of the model.
std::string render_text(const ModelReport& report);

std::string to_json(const ModelReport& report);
ModelReport report_from_json(const std::string& text);

}  // namespace nstload
