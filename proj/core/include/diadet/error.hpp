// diadet/error.hpp

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

#pragma once

#include <stdexcept>
#include <string>

namespace diadet {

enum class ErrorCode {
  kMalformedLine,
  kNegativeDuration,
  kUnknownRecording,
  kUnsupportedFormat,
  kTruncatedFile,
  kTooShort,
  kDimensionMismatch,
  kNoSpeech,
  kTooFewFrames,
  kDegenerate,
  kZeroVector,
  kInsufficientData,
  kSingularW,
  kEmptyCluster,
  kDegenerateInit,
  kLengthMismatch,
  kDegenerateKeys,
  kEmptyReference,
  kEmptyClass,
  kNonpositiveBaseline,
  kConfigInvalid,
  kUnknownKey,
  kMissingPath,
  kOutOfRange,
  kInvalidArgument,
  kIo,
};

const char *ErrorCodeName(ErrorCode code);

// Every failure in the library surfaces as this exception. `line()` is set
// only by the line-oriented parsers (1-based, 0 otherwise).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what, int line = 0)
      : std::runtime_error(what), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  int line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  int line_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &what,
                              int line = 0) {
  throw Error(code, std::string(ErrorCodeName(code)) + ": " + what, line);
}

}  // namespace diadet
