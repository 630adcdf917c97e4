// Copyright 2026 The treedet Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treedet {

enum class ErrorCode {
  kCycleDetected,
  kMultipleRoots,
  kDanglingParent,
  kZeroRate,
  kLeafWithPredecessors,
  kMalformedTopology,
  kUnknownNode,
  kIsFusionCenter,
  kBadProbabilityVector,
  kDimensionMismatch,
  kBadBinCount,
  kIndexOutOfRange,
  kBadCoordinate,
  kUnsupportedHypothesisCount,
  kMissingStrategy,
  kNotAPredecessor,
  kWrongTopology,
  kBudgetExceeded,
  kNumerical,
  kBadConfig,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kMultipleRoots: return "MultipleRoots";
    case ErrorCode::kDanglingParent: return "DanglingParent";
    case ErrorCode::kZeroRate: return "ZeroRate";
    case ErrorCode::kLeafWithPredecessors: return "LeafWithPredecessors";
    case ErrorCode::kMalformedTopology: return "MalformedTopology";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kIsFusionCenter: return "IsFusionCenter";
    case ErrorCode::kBadProbabilityVector: return "BadProbabilityVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kBadBinCount: return "BadBinCount";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kBadCoordinate: return "BadCoordinate";
    case ErrorCode::kUnsupportedHypothesisCount: return "UnsupportedHypothesisCount";
    case ErrorCode::kMissingStrategy: return "MissingStrategy";
    case ErrorCode::kNotAPredecessor: return "NotAPredecessor";
    case ErrorCode::kWrongTopology: return "WrongTopology";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kNumerical: return "Numerical";
    case ErrorCode::kBadConfig: return "BadConfig";
  }
  return "Unknown";
}

// All library failures are reported through this exception type; callers
// that need to branch on the failure kind inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace treedet
