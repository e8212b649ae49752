#pragma once

#include <stdexcept>
#include <string>

namespace nnlrp {

/// Failure categories carried by every Error. The model loader and the CLI
/// rely on these being distinguishable, so keep one code per failure class.
enum class ErrorCode {
  kShapeMismatch,
  kInvalidAxis,
  kBadParameter,
  kGraphCycle,
  kGraphSink,
  kGraphEdge,
  kShapeConflict,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kChecksumMismatch,
  kIoFailure,
  kBadInput,
  kBadTarget,
  kBadRule,
  kMissingRule,
  kTraceMismatch,
  kTrainingDiverged,
};

const char* errorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace nnlrp
