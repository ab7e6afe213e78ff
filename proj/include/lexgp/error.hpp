#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexgp {

enum class ErrorCode {
  InvalidInput,
  DimensionMismatch,
  NonpositiveValue,
  Infeasible,
  IterationLimit,
  DegenerateDual,
  InconsistentSystem,
  InfeasibleRecovery,
  SamplerExhausted,
  MalformedDocument,
  NonpositiveCoefficient,
  ExponentLengthMismatch,
  EmptyObjectives,
  NonpositiveBound,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonpositiveValue: return "NonpositiveValue";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::DegenerateDual: return "DegenerateDual";
    case ErrorCode::InconsistentSystem: return "InconsistentSystem";
    case ErrorCode::InfeasibleRecovery: return "InfeasibleRecovery";
    case ErrorCode::SamplerExhausted: return "SamplerExhausted";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::NonpositiveCoefficient: return "NonpositiveCoefficient";
    case ErrorCode::ExponentLengthMismatch: return "ExponentLengthMismatch";
    case ErrorCode::EmptyObjectives: return "EmptyObjectives";
    case ErrorCode::NonpositiveBound: return "NonpositiveBound";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The code lets
/// callers (notably the CLI) map failures to exit statuses without parsing
/// message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by the problem data rather than by a solver.
  bool is_input_error() const noexcept {
    switch (code_) {
      case ErrorCode::InvalidInput:
      case ErrorCode::DimensionMismatch:
      case ErrorCode::NonpositiveValue:
      case ErrorCode::MalformedDocument:
      case ErrorCode::NonpositiveCoefficient:
      case ErrorCode::ExponentLengthMismatch:
      case ErrorCode::EmptyObjectives:
      case ErrorCode::NonpositiveBound:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace lexgp
