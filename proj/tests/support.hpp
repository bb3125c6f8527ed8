#pragma once

#include <doctest.h>

#include "gwloc/error.hpp"

namespace gwloc::testing {

// Runs fn and returns the code of the gwloc::Error it raised, or kInternal if none.
template <typename Fn>
ErrorCode error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace gwloc::testing
