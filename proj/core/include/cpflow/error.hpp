#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cpflow {

enum class ErrorCode {
  InvalidSpec,
  DisconnectedDomain,
  OverlappingRegions,
  FluxIncompatible,
  NonCommensurateGrid,
  OutOfRange,
  NonpositiveWidth,
  GridMismatch,
  BadEpsilon,
  SingularSystem,
  IncompatibleBoundaryFlux,
  StreamMismatch,
  NonConvergence,
  LinearSolveFailure,
  DegenerateNormalization,
  GridTooCoarse,
  TruncationTooShort,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `value()` carries the offending number when there
/// is one (compatibility residual, best residual at non-convergence, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        double value = std::numeric_limits<double>::quiet_NaN());

  ErrorCode code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

}  // namespace cpflow
