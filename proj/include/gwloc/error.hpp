#pragma once

#include <stdexcept>
#include <string>

namespace gwloc {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIndex,
  kDomain,
  kGeometry,
  kDegenerateSignal,
  kSplit,
  kShape,
  kTraining,
  kFormat,
  kIo,
  kInternal,
};

const char* to_string(ErrorCode code);

// All library failures are reported as Error; the C API maps code() onto
// gwloc_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace gwloc
