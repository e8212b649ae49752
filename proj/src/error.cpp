#include "nnlrp/error.hpp"

namespace nnlrp {

const char* errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kInvalidAxis: return "invalid axis";
    case ErrorCode::kBadParameter: return "bad parameter";
    case ErrorCode::kGraphCycle: return "graph cycle";
    case ErrorCode::kGraphSink: return "graph sink";
    case ErrorCode::kGraphEdge: return "graph edge";
    case ErrorCode::kShapeConflict: return "shape conflict";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kBadVersion: return "bad version";
    case ErrorCode::kTruncated: return "truncated payload";
    case ErrorCode::kChecksumMismatch: return "checksum mismatch";
    case ErrorCode::kIoFailure: return "i/o failure";
    case ErrorCode::kBadInput: return "bad input";
    case ErrorCode::kBadTarget: return "bad target";
    case ErrorCode::kBadRule: return "bad rule";
    case ErrorCode::kMissingRule: return "missing rule";
    case ErrorCode::kTraceMismatch: return "trace mismatch";
    case ErrorCode::kTrainingDiverged: return "training diverged";
  }
  return "unknown error";
}

}  // namespace nnlrp
