#include "cpflow/error.hpp"

namespace cpflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DisconnectedDomain: return "DisconnectedDomain";
    case ErrorCode::OverlappingRegions: return "OverlappingRegions";
    case ErrorCode::FluxIncompatible: return "FluxIncompatible";
    case ErrorCode::NonCommensurateGrid: return "NonCommensurateGrid";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonpositiveWidth: return "NonpositiveWidth";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::IncompatibleBoundaryFlux: return "IncompatibleBoundaryFlux";
    case ErrorCode::StreamMismatch: return "StreamMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::DegenerateNormalization: return "DegenerateNormalization";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::TruncationTooShort: return "TruncationTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, double value)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      value_(value) {}

}  // namespace cpflow
