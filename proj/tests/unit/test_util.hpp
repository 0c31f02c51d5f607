// tests/unit/test_util.hpp

// Copyright 2026  The diadet Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DIADET_TESTS_UNIT_TEST_UTIL_HPP_
#define DIADET_TESTS_UNIT_TEST_UTIL_HPP_

#include <functional>

#include <gtest/gtest.h>

#include "diadet/error.hpp"

namespace diadet {
namespace testing {

// Error code thrown by fn; fails the test when nothing is thrown.
inline ErrorCode CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

}  // namespace testing
}  // namespace diadet

#endif  // DIADET_TESTS_UNIT_TEST_UTIL_HPP_
