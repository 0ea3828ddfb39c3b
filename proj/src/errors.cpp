#include "aep/errors.hpp"

namespace aep {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::ZeroDisplacement: return "ZeroDisplacement";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DriftZero: return "DriftZero";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ConditioningConflict: return "ConditioningConflict";
    case ErrorCode::RingTooSmall: return "RingTooSmall";
    case ErrorCode::NotNearestNeighbor: return "NotNearestNeighbor";
    case ErrorCode::WindowTooWide: return "WindowTooWide";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::DegenerateTime: return "DegenerateTime";
    case ErrorCode::NotStationary: return "NotStationary";
    case ErrorCode::WindowMassLoss: return "WindowMassLoss";
    case ErrorCode::MissingConditionedEnsemble: return "MissingConditionedEnsemble";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::TimeTooLarge: return "TimeTooLarge";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::SupportTooWide: return "SupportTooWide";
    case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::Disagreement: return "Disagreement";
    case ErrorCode::TailDominates: return "TailDominates";
    case ErrorCode::InsufficientSpan: return "InsufficientSpan";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::GoldenDrift: return "GoldenDrift";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeProbability:
    case ErrorCode::NotNormalized:
    case ErrorCode::EmptySupport:
    case ErrorCode::ZeroDisplacement:
    case ErrorCode::OutOfRange:
    case ErrorCode::InvalidConfig:
    case ErrorCode::ConditioningConflict:
    case ErrorCode::NonPositiveLambda:
    case ErrorCode::ConfigParse:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace aep
