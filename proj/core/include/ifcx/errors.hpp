#pragma once

#include <stdexcept>
#include <string>

namespace ifcx {

enum class ErrorCode {
  kNegativeProbability,
  kRowSum,
  kDimensionMismatch,
  kPOutOfRange,
  kMapRangeMismatch,
  kEmptyAxes,
  kOverlappingGroups,
  kAxesMismatch,
  kShapeMismatch,
  kInfeasibleMarginals,
  kSpaceTooLarge,
  kGuardExceeded,
  kIllegalUvPair,
  kInvalidArgument,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace ifcx
