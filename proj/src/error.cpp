#include "hqe/error.hpp"

namespace hqe {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotInCone: return "NotInCone";
    case ErrorCode::NotPositiveCone: return "NotPositiveCone";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::InsideExcludedRegion: return "InsideExcludedRegion";
    case ErrorCode::NoTouchingQuadratic: return "NoTouchingQuadratic";
    case ErrorCode::CTooSmall: return "CTooSmall";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace hqe
