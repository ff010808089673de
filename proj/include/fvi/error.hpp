#pragma once

#include <stdexcept>
#include <string>

namespace fvi {

enum class ErrorKind {
  kUnsupportedStageCount,
  kStabilityPole,
  kContourDegeneracy,
  kIndexOutOfRange,
  kDegenerateNodes,
  kInvalidArgument,
  kNewtonFailure,
  kHistoryIncomplete,
  kGammaPole,
  kShapeMismatch,
  kIo,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base error for everything the library throws. The kind is stable and
/// is what callers (and tests) should branch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fvi
