#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nstload/regress.hpp"
#include "nstload/signal.hpp"

namespace nstload::cli {

enum class OutputFormat { text, json, csv };

enum ExitCode : int { kOk = 0, kDomainError = 1, kIoError = 2 };

struct Config {
  double window_len_s = 120.0;
  RestAggregation rest_agg = RestAggregation::mean;
  double tolerance_threshold = 0.1;
  bool paper_literal_tolerance = false;
  Selection selection = Selection::forward;
  double min_improvement = 0.0;
  TemperatureBand band;
  std::optional<OutputFormat> output_format;  // unset: the subcommand's default

  void validate() const;
  StepwiseConfig stepwise() const;
};

/// Runs one invocation; `args` excludes the program name. Returns the exit
/// code (0 ok, 1 domain error, 2 I/O error).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nstload::cli
