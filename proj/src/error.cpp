#include "smart_track/error.hpp"

namespace smart_track {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::NonPositiveDt: return "NonPositiveDt";
    case ErrorCode::SingularInnovation: return "SingularInnovation";
    case ErrorCode::NoValidDepth: return "NoValidDepth";
    case ErrorCode::OffImage: return "OffImage";
    case ErrorCode::NoContour: return "NoContour";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace smart_track
