#pragma once

#include <stdexcept>
#include <string>

namespace asap {

enum class ErrorCode {
  NotSquare,
  NotSymmetric,
  NotPositiveDefinite,
  NonFinite,
  DimensionMismatch,
  EmptyInput,
  NoConvergence,
  InvalidBand,
  EventOutOfRange,
  MixedLabels,
  MissingClass,
  BadPrior,
  WrongMode,
  EmptyFlashSet,
  IndexOutOfRange,
  NoEvidence,
  BadConfig,
  InsufficientTraining,
  MissingLabels,
  BadArgument,
  FormatError,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::EventOutOfRange: return "EventOutOfRange";
    case ErrorCode::MixedLabels: return "MixedLabels";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::BadPrior: return "BadPrior";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::EmptyFlashSet: return "EmptyFlashSet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NoEvidence: return "NoEvidence";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::InsufficientTraining: return "InsufficientTraining";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace asap
