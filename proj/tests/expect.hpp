#pragma once

#include <doctest.h>

#include "helpers.hpp"

namespace kkf::test {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace kkf::test
