#include "xbeam/error.hpp"

namespace xbeam {

std::string_view error_tag(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::Parse: return "E_PARSE";
  case ErrorCode::InvariantViolation: return "E_INVARIANT";
  case ErrorCode::Io: return "E_IO";
  case ErrorCode::Validation: return "E_VALIDATION";
  case ErrorCode::Precondition: return "E_PRECONDITION";
  case ErrorCode::SingularHarmonic: return "E_SINGULAR_HARMONIC";
  case ErrorCode::OffBand: return "E_OFF_BAND";
  case ErrorCode::GridTooCoarse: return "E_GRID_TOO_COARSE";
  case ErrorCode::GridTooShort: return "E_GRID_TOO_SHORT";
  case ErrorCode::RankDeficient: return "E_RANK_DEFICIENT";
  case ErrorCode::OrderOverflow: return "E_ORDER_OVERFLOW";
  case ErrorCode::ConditioningFailure: return "E_CONDITIONING";
  case ErrorCode::SingularSystem: return "E_SINGULAR_SYSTEM";
  case ErrorCode::IllConditioned: return "E_ILL_CONDITIONED";
  case ErrorCode::AllZero: return "E_ALL_ZERO";
  }
  return "E_UNKNOWN";
}

} // namespace xbeam
