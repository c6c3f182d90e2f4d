// Copyright 2026 The mrac-scale Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrac {

enum class ErrorCode {
  kDimMismatch,
  kLyapunovSingular,
  kRankDeficient,
  kNotSymmetric,
  kMatchingConditionViolated,
  kSingularLambda,
  kTimeOutOfRange,
  kKcSingular,
  kMissingFilterState,
  kDiverged,
  kAlphaZero,
  kEmodNegativeAlpha,
  kGridMismatch,
  kInvalidScenario,
  kParse,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimMismatch: return "dim-mismatch";
    case ErrorCode::kLyapunovSingular: return "lyapunov-singular";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kNotSymmetric: return "not-symmetric";
    case ErrorCode::kMatchingConditionViolated: return "matching-condition-violated";
    case ErrorCode::kSingularLambda: return "singular-lambda";
    case ErrorCode::kTimeOutOfRange: return "t-out-of-range";
    case ErrorCode::kKcSingular: return "kc-singular";
    case ErrorCode::kMissingFilterState: return "missing-filter-state";
    case ErrorCode::kDiverged: return "diverged";
    case ErrorCode::kAlphaZero: return "alpha-zero";
    case ErrorCode::kEmodNegativeAlpha: return "emod-negative-alpha";
    case ErrorCode::kGridMismatch: return "grid-mismatch";
    case ErrorCode::kInvalidScenario: return "invalid-scenario";
    case ErrorCode::kParse: return "parse-error";
  }
  return "unknown";
}

/// Exception carrying a stable, machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mrac
