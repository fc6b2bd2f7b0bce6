/* Copyright 2026 The memaudit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "memaudit/error.hpp"

namespace memaudit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kSampleTooLarge: return "SampleTooLarge";
    case ErrorCode::kEmptyCaption: return "EmptyCaption";
    case ErrorCode::kUnknownStrategy: return "UnknownStrategy";
    case ErrorCode::kInvalidTemplate: return "InvalidTemplate";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUnknownCaption: return "UnknownCaption";
    case ErrorCode::kInconsistentCaptionSets: return "InconsistentCaptionSets";
    case ErrorCode::kConstantSeries: return "ConstantSeries";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNoData: return "NoData";
    case ErrorCode::kFailureCeiling: return "FailureCeiling";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInterrupted: return "Interrupted";
  }
  return "Unknown";
}

}  // namespace memaudit
