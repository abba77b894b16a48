#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autoscale {

enum class ErrorCode {
  kOversizeItem,
  kInconsistentInput,
  kTooLarge,
  kUnknownPartition,
  kLengthMismatch,
  kEmptyInput,
  kInvalidSpec,
  kIncompleteRecords,
  kParseError,
  kUnknownDelta,
  kScenarioError,
  kInvariantViolation,
  kAckTimeout,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace autoscale
