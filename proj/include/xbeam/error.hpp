#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xbeam {

enum class ErrorCode {
  Parse,
  InvariantViolation,
  Io,
  Validation,
  Precondition,
  SingularHarmonic,
  OffBand,
  GridTooCoarse,
  GridTooShort,
  RankDeficient,
  OrderOverflow,
  ConditioningFailure,
  SingularSystem,
  IllConditioned,
  AllZero,
};

// Stable machine-readable tag, e.g. "E_PARSE".
std::string_view error_tag(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace xbeam
