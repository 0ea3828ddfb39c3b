#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aep {

enum class ErrorCode {
  // model
  NegativeProbability,
  NotNormalized,
  EmptySupport,
  ZeroDisplacement,
  OutOfRange,
  DriftZero,
  // simulator
  InvalidConfig,
  ConditioningConflict,
  RingTooSmall,
  NotNearestNeighbor,
  WindowTooWide,
  // estimators
  EmptyEnsemble,
  DegenerateTime,
  NotStationary,
  WindowMassLoss,
  MissingConditionedEnsemble,
  // oracle
  DimensionTooLarge,
  TimeTooLarge,
  SolverFailure,
  SupportTooWide,
  // resolvent
  TruncationInsufficient,
  NonPositiveLambda,
  Disagreement,
  // analysis
  TailDominates,
  InsufficientSpan,
  BadOrder,
  GridMismatch,
  // cli
  ConfigParse,
  GoldenDrift,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad user input (mapped to exit code 2 by the CLI).
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace aep
