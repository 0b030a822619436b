#include "kkf/error.hpp"

namespace kkf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::PStepPole: return "PStepPole";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::AllZeroCoefficients: return "AllZeroCoefficients";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::SingularInnovationCovariance: return "SingularInnovationCovariance";
    case ErrorCode::SlotOrderViolation: return "SlotOrderViolation";
    case ErrorCode::EmptyObservation: return "EmptyObservation";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InfeasiblePoint: return "InfeasiblePoint";
    case ErrorCode::NoFeasibleDescent: return "NoFeasibleDescent";
    case ErrorCode::DisconnectedAfterRetries: return "DisconnectedAfterRetries";
    case ErrorCode::SingularNoiseKernel: return "SingularNoiseKernel";
    case ErrorCode::SampleCountExceedsNodes: return "SampleCountExceedsNodes";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace kkf
