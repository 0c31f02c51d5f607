// core/src/error.cpp

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

#include "diadet/error.hpp"

namespace diadet {

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kNegativeDuration: return "NegativeDuration";
    case ErrorCode::kUnknownRecording: return "UnknownRecording";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoSpeech: return "NoSpeech";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kSingularW: return "SingularW";
    case ErrorCode::kEmptyCluster: return "EmptyCluster";
    case ErrorCode::kDegenerateInit: return "DegenerateInit";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateKeys: return "DegenerateKeys";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kNonpositiveBaseline: return "NonpositiveBaseline";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kMissingPath: return "MissingPath";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace diadet
