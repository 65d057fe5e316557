#include "sea/error.hpp"

namespace sea {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIncompatibleTemplate: return "IncompatibleTemplate";
    case ErrorCode::kEmptySpace: return "EmptySpace";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFiniteUtility: return "NonFiniteUtility";
    case ErrorCode::kNeverAudited: return "NeverAudited";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonPositiveCost: return "NonPositiveCost";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kUnknownSibling: return "UnknownSibling";
    case ErrorCode::kInactiveUnit: return "InactiveUnit";
    case ErrorCode::kMalformedTrace: return "MalformedTrace";
    case ErrorCode::kUnknownConfiguration: return "UnknownConfiguration";
    case ErrorCode::kMalformedLog: return "MalformedLog";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sea
