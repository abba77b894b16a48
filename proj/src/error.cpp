#include "autoscale/error.hpp"

namespace autoscale {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOversizeItem: return "OversizeItem";
    case ErrorCode::kInconsistentInput: return "InconsistentInput";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kUnknownPartition: return "UnknownPartition";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kIncompleteRecords: return "IncompleteRecords";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownDelta: return "UnknownDelta";
    case ErrorCode::kScenarioError: return "ScenarioError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kAckTimeout: return "AckTimeout";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace autoscale
