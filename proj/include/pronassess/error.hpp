// Copyright 2026 The Pronassess Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pronassess {

/// Every failure raised by the library carries one of these codes so callers
/// (the CLI in particular) can map them to exit statuses without string
/// matching.
enum class ErrorCode {
  kInvalidArgument,
  kUnknownSymbol,
  kStressOnConsonant,
  kMissingStressDigit,
  kLengthMismatch,
  kNotAnError,
  kDegenerateInventory,
  kMonosyllableInput,
  kNoPerturbation,
  kProducerFailure,
  kParseError,
  kEmptyTrainingSet,
  kEmptyNBest,
  kShapeMismatch,
  kZeroEvidence,
  kNonPositiveDuration,
  kUndefinedMetric,
  kNoPositives,
  kScoreOutOfRange,
  kDimMismatch,
  kSingularGram,
  kNoLabels,
  kIoError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownSymbol: return "UnknownSymbol";
    case ErrorCode::kStressOnConsonant: return "StressOnConsonant";
    case ErrorCode::kMissingStressDigit: return "MissingStressDigit";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNotAnError: return "NotAnError";
    case ErrorCode::kDegenerateInventory: return "DegenerateInventory";
    case ErrorCode::kMonosyllableInput: return "MonosyllableInput";
    case ErrorCode::kNoPerturbation: return "NoPerturbation";
    case ErrorCode::kProducerFailure: return "ProducerFailure";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kEmptyNBest: return "EmptyNBest";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kZeroEvidence: return "ZeroEvidence";
    case ErrorCode::kNonPositiveDuration: return "NonPositiveDuration";
    case ErrorCode::kUndefinedMetric: return "UndefinedMetric";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kNoLabels: return "NoLabels";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace pronassess
