#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sea {

enum class ErrorCode {
  kIncompatibleTemplate,
  kEmptySpace,
  kShapeMismatch,
  kNonFiniteUtility,
  kNeverAudited,
  kInvalidParams,
  kLengthMismatch,
  kNonPositiveCost,
  kTooLarge,
  kUnknownSibling,
  kInactiveUnit,
  kMalformedTrace,
  kUnknownConfiguration,
  kMalformedLog,
  kInvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sea
