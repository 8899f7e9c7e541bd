#include "nstload/error.hpp"

namespace nstload {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_sample: return "invalid-sample";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::empty_interval: return "empty-interval";
    case ErrorCode::gap: return "gap";
    case ErrorCode::empty_series: return "empty-series";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
    case ErrorCode::singular_design: return "singular-design";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::degenerate_target: return "degenerate-target";
    case ErrorCode::undefined_adjustment: return "undefined-adjustment";
  }
  return "unknown";
}

}  // namespace nstload
