#pragma once

#include <stdexcept>
#include <string>

namespace fastslow {

enum class ErrorKind {
  NonPositiveSpeed,
  SingularIminusG1,
  DimensionMismatch,
  NonFiniteEntry,
  BlsSingular,
  BoundaryZero,
  NonConvergence,
  WitnessVerificationFailed,
  NoStableEpsilonFound,
  PreconditionViolation,
  IncompatibleStep,
  CflViolation,
  DegenerateWindow,
  ParseError,
  ValidationError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveSpeed: return "NonPositiveSpeed";
    case ErrorKind::SingularIminusG1: return "SingularIminusG1";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::BlsSingular: return "BlsSingular";
    case ErrorKind::BoundaryZero: return "BoundaryZero";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::WitnessVerificationFailed: return "WitnessVerificationFailed";
    case ErrorKind::NoStableEpsilonFound: return "NoStableEpsilonFound";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::IncompatibleStep: return "IncompatibleStep";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::DegenerateWindow: return "DegenerateWindow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `cause()` differs from `kind()` only
/// for wrapping errors such as a scenario ValidationError that forwards the
/// system-model error underneath it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : Error(kind, kind, message) {}

  Error(ErrorKind kind, ErrorKind cause, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        cause_(cause) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorKind cause() const noexcept { return cause_; }

 private:
  ErrorKind kind_;
  ErrorKind cause_;
};

}  // namespace fastslow
