#pragma once

#include <gtest/gtest.h>

#include <functional>

#include "mfcons/error.hpp"

namespace mfcons::testing {

/// Runs `fn` and returns the code of the mfcons::Error it throws.
inline Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an mfcons::Error";
  return Errc::invalid_argument;
}

}  // namespace mfcons::testing
