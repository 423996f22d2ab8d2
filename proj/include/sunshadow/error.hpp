#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sunshadow {

enum class ErrorCode {
  DegenerateOrigin,
  BranchUndefined,
  ConfigInvalid,
  // stark
  UnboundedU,
  OutOfRange,
  InvalidRatio,
  NotFound,
  // propagate
  NoConvergence,
  SingularSection,
  NoExitRoot,
  // brake
  ComplexXT,
  OutOfRegion,
  NoBracket,
  // ssmap
  ForbiddenPoint,
  LostOrbit,
  SampleLost,
  // manifolds
  LinearRegimeViolated,
  AllCandidatesLost,
  BranchExtinct,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported through this type; `code()` names the
// violated precondition so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sunshadow
