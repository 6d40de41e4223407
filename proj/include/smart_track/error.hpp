#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smart_track {

enum class ErrorCode {
  BehindCamera,
  NonPositiveDepth,
  NonPositiveDt,
  SingularInnovation,
  NoValidDepth,
  OffImage,
  NoContour,
  InvalidArgument,
  ConfigError,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// per-frame pipeline can degrade to "no measurement" without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace smart_track
