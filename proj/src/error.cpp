#include "gwloc/error.hpp"

namespace gwloc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kIndex: return "index error";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kGeometry: return "geometry error";
    case ErrorCode::kDegenerateSignal: return "degenerate signal";
    case ErrorCode::kSplit: return "split error";
    case ErrorCode::kShape: return "shape error";
    case ErrorCode::kTraining: return "training error";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

}  // namespace gwloc
