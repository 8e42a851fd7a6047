// Copyright 2026 The Semixup Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "semixup/error.hpp"

namespace semixup {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateImage: return "DegenerateImage";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBatchSizeMismatch: return "BatchSizeMismatch";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kAllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::kTooFewDifferences: return "TooFewDifferences";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kMissingRun: return "MissingRun";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace semixup
