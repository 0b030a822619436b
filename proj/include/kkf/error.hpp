#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kkf {

enum class ErrorCode {
  NonSymmetric,
  NegativeWeight,
  NonzeroDiagonal,
  NotSymmetric,
  DimensionMismatch,
  EmptyPath,
  PStepPole,
  DegenerateKernel,
  AllZeroCoefficients,
  InvalidParameter,
  SingularKernel,
  SingularInnovationCovariance,
  SlotOrderViolation,
  EmptyObservation,
  SingularSystem,
  InfeasiblePoint,
  NoFeasibleDescent,
  DisconnectedAfterRetries,
  SingularNoiseKernel,
  SampleCountExceedsNodes,
  ZeroDenominator,
  ConfigInvalid,
  ParseError,
  RaggedRows,
  NonNumeric,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception; `code()` identifies the failure class so callers
/// and tests can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace kkf
