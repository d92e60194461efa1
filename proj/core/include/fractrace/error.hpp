#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fractrace {

enum class ErrorCode {
  kInput,
  kCellAmbiguity,
  kBranchSetNotFinite,
  kPostcriticalNotFinite,
  kOrbitMeetsBranchSet,
  kSupportExplosion,
  kMassMismatch,
  kDegenerateInput,
  kLevelMismatch,
  kInsufficientMembers,
  kAtomInExclusionWindow,
  kNotTracial,
  kUnequalOrbitMasses,
  kNegativeResidual,
  kBetaTooSmall,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fractrace
