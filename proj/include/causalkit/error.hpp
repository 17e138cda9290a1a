// Copyright 2026 The causalkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CAUSALKIT_ERROR_HPP_
#define CAUSALKIT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace causalkit {

enum class ErrorCode {
  kInvalidArgument,
  // Data validation.
  kLengthMismatch,
  kNonFiniteValue,
  kEmptyDataset,
  kUnknownColumn,
  kParseError,
  // Regression.
  kRankDeficient,
  kDimensionMismatch,
  kSeparationDetected,
  kNoVariationInD,
  kNotConverged,
  // Propensity scores.
  kSigmaFloor,
  kAllUnitsTrimmed,
  kEmptyStratumArm,
  // Cross-sectional estimators.
  kEmptyTreatmentArm,
  kZeroPropensity,
  kEmptyDoseGroup,
  kNoUsableStratum,
  kInsufficientMatches,
  // Panel.
  kNoWithinVariation,
  kTooFewPeriods,
  // Quasi-experimental.
  kWeakOrZeroFirstStage,
  kOrderConditionViolated,
  kEmptyCell,
  kDegenerateProblem,
  kOneSidedData,
  kNoFirstStageJump,
  // Variance.
  kTooManyFailedReplicates,
  kMissingCoefCovariance,
  // Simulation.
  kUnknownCase,
  kTooManyFailedRuns,
  kMissingReferenceCell,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this type; `code()` is stable
// and is what callers and tests should branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for failures caused by bad input rather than by estimation.
  bool is_input_error() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace causalkit

#endif  // CAUSALKIT_ERROR_HPP_
