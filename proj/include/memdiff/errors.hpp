#pragma once
// Error taxonomy shared by all solver modules.
//
// Every failure mode a caller can react to is identified by an ErrorCode and
// thrown as a SolverError.  Codes are grouped into three categories that the
// command-line driver maps onto process exit codes:
//
//   Validation -> exit 2  (malformed input, inconsistent configuration)
//   Solver     -> exit 3  (an algorithm failed to converge / lost its target)
//   Regime     -> exit 4  (the requested computation is well-posed but the
//                          model sits outside the regime where the quantity
//                          is defined: wrong sign conditions, empty branch,
//                          violated structural hypotheses)

#include <stdexcept>
#include <string>

namespace memdiff {

enum class ErrorCode {
  // validation
  InvalidConfig,
  // solver failures
  NewtonDiverged,
  SingularBorderedSystem,
  NoSignDefiniteEigenvector,
  DenominatorNotPositive,
  NewtonLostEigenvalue,
  CountJumpNotTwo,
  StepUnstable,
  HistoryUnderrun,
  // regime violations
  FeasibilityViolated,
  EmptyBranch,
  NoSignChange,
  SolvabilityViolated,
  A2Violated,
  PreconditionViolated,
  AmplitudeZero,
  OutOfRegime,
  Indeterminate,
};

enum class ErrorCategory { Validation, Solver, Regime };

inline ErrorCategory category(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Validation;
    case ErrorCode::NewtonDiverged:
    case ErrorCode::SingularBorderedSystem:
    case ErrorCode::NoSignDefiniteEigenvector:
    case ErrorCode::DenominatorNotPositive:
    case ErrorCode::NewtonLostEigenvalue:
    case ErrorCode::CountJumpNotTwo:
    case ErrorCode::StepUnstable:
    case ErrorCode::HistoryUnderrun:
      return ErrorCategory::Solver;
    default:
      return ErrorCategory::Regime;
  }
}

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::SingularBorderedSystem: return "SingularBorderedSystem";
    case ErrorCode::NoSignDefiniteEigenvector: return "NoSignDefiniteEigenvector";
    case ErrorCode::DenominatorNotPositive: return "DenominatorNotPositive";
    case ErrorCode::NewtonLostEigenvalue: return "NewtonLostEigenvalue";
    case ErrorCode::CountJumpNotTwo: return "CountJumpNotTwo";
    case ErrorCode::StepUnstable: return "StepUnstable";
    case ErrorCode::HistoryUnderrun: return "HistoryUnderrun";
    case ErrorCode::FeasibilityViolated: return "FeasibilityViolated";
    case ErrorCode::EmptyBranch: return "EmptyBranch";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::SolvabilityViolated: return "SolvabilityViolated";
    case ErrorCode::A2Violated: return "A2Violated";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::AmplitudeZero: return "AmplitudeZero";
    case ErrorCode::OutOfRegime: return "OutOfRegime";
    case ErrorCode::Indeterminate: return "Indeterminate";
  }
  return "Unknown";
}

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }
  ErrorCategory error_category() const { return memdiff::category(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw SolverError(code, what);
}

}  // namespace memdiff
