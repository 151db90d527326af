#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewcrit {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteEvaluation,
  RankDeficient,
  InsufficientSamples,
  BelowFloor,
  DimensionMismatch,
  NotSquare,
  NonGraph,
  DegenerateHessian,
  MaxIterExceeded,
  BaseMismatch,
  NotInZeroSection,
  MissingTargetH,
  NotHCompatible,
  InversionFailed,
  NotDiagonal,
  PsiInversionFailed,
  DataContactViolation,
  SingularSystem,
  HypothesisViolated,
  BranchJump,
  SyntaxError,
  UnknownIdentifier,
  DimensionError,
  DomainError,
  MissingBinding,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the
// message is prefixed with the code name so CLI output stays greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::BelowFloor: return "BelowFloor";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NonGraph: return "NonGraph";
    case ErrorCode::DegenerateHessian: return "DegenerateHessian";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::NotInZeroSection: return "NotInZeroSection";
    case ErrorCode::MissingTargetH: return "MissingTargetH";
    case ErrorCode::NotHCompatible: return "NotHCompatible";
    case ErrorCode::InversionFailed: return "InversionFailed";
    case ErrorCode::NotDiagonal: return "NotDiagonal";
    case ErrorCode::PsiInversionFailed: return "PsiInversionFailed";
    case ErrorCode::DataContactViolation: return "DataContactViolation";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::BranchJump: return "BranchJump";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace skewcrit
