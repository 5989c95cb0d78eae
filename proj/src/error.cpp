#include "vjt/error.hpp"

namespace vjt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::DegenerateRay: return "DegenerateRay";
    case ErrorCode::JointAtCameraHeight: return "JointAtCameraHeight";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::InvalidTilt: return "InvalidTilt";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::AnatomicalOrderViolated: return "AnatomicalOrderViolated";
    case ErrorCode::MissingJoint: return "MissingJoint";
    case ErrorCode::NoUsableJoint: return "NoUsableJoint";
    case ErrorCode::NonPositiveDt: return "NonPositiveDt";
    case ErrorCode::SigmaPointFailure: return "SigmaPointFailure";
    case ErrorCode::ObservationDimensionMismatch: return "ObservationDimensionMismatch";
    case ErrorCode::UninitializedSession: return "UninitializedSession";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::EmptyScenario: return "EmptyScenario";
    case ErrorCode::TimestampMismatch: return "TimestampMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace vjt
