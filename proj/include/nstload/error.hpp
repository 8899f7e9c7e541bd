#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nstload {

enum class ErrorCode {
  invalid_sample,
  invalid_argument,
  empty_interval,
  gap,
  empty_series,
  validation,
  io,
  singular_design,
  insufficient_data,
  degenerate_target,
  undefined_adjustment,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code is the stable part; the
/// message carries locations (file, row, session, window) for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nstload
