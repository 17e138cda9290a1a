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

#ifndef CAUSALKIT_CORE_HPP_
#define CAUSALKIT_CORE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "causalkit/error.hpp"

namespace causalkit {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class TreatmentKind { kBinary, kMultivalued, kContinuous };

std::string_view treatment_kind_name(TreatmentKind kind);

// Columns as handed over by a caller or the CSV loader, before any checks.
struct RawColumns {
  VectorXd y;
  VectorXd d;
  MatrixXd x;                    // n x p, p may be zero
  std::optional<MatrixXd> z;     // n x L instruments
};

// A validated cross-sectional sample (y_i, d_i, x_i[, z_i]).
//
// Only `validate` produces instances with the invariants established; every
// estimator assumes it receives one. Treat as immutable once built.
struct ObservationalDataset {
  VectorXd y;
  VectorXd d;
  MatrixXd x;
  std::optional<MatrixXd> z;
  TreatmentKind treatment_kind = TreatmentKind::kContinuous;
  std::vector<double> levels;  // declared dose levels, multivalued only

  Index n() const { return y.size(); }
  Index p() const { return x.cols(); }

  bool operator==(const ObservationalDataset& other) const;
};

// Checks lengths, finiteness and treatment coding. When `kind` is omitted
// the treatment is binary if every d_i is 0 or 1 and continuous otherwise;
// multivalued treatments must be declared together with their level set.
ObservationalDataset validate(RawColumns raw,
                              std::optional<TreatmentKind> kind = std::nullopt,
                              std::vector<double> levels = {});

// Re-validation keeps the declared kind and level set.
ObservationalDataset validate(const ObservationalDataset& ds);

// Rows `rows` of `ds` in the given order; duplicates allowed (bootstrap).
ObservationalDataset take_rows(const ObservationalDataset& ds,
                               std::span<const Index> rows);

// Longitudinal sample. Rows of one unit need not be contiguous, but their
// times must be strictly increasing in row order.
struct PanelDataset {
  std::vector<std::int64_t> unit;
  std::vector<std::int64_t> time;
  VectorXd y;
  VectorXd d;
  MatrixXd x;
  // Row indices per unit in order of first appearance; filled by validate.
  std::vector<std::vector<Index>> groups;

  Index n() const { return y.size(); }
  Index n_units() const { return static_cast<Index>(groups.size()); }
};

PanelDataset validate_panel(std::vector<std::int64_t> unit,
                            std::vector<std::int64_t> time, VectorXd y,
                            VectorXd d, MatrixXd x);

// Whole units `units` (indices into pds.groups), duplicates relabelled so
// that each draw is a distinct unit.
PanelDataset take_units(const PanelDataset& pds, std::span<const Index> units);

enum class Estimand { kATE, kAPO };

struct CausalEstimate {
  Estimand estimand = Estimand::kATE;
  std::string method;
  double dose = 1.0;
  double reference = 0.0;
  double point = 0.0;
  std::optional<double> variance;
  std::optional<std::pair<double, double>> ci;
  Index n_used = 0;
  std::map<std::string, double> diagnostics;

  // Sets variance and the matching 95% normal interval; ignores non-finite
  // or negative input so that degenerate fits leave both absent.
  void set_variance(double v);
};

// Treated-arm mean minus control-arm mean.
CausalEstimate difference_in_means(const ObservationalDataset& ds);

// Shared helpers.
bool is_binary_coded(const VectorXd& v);
void require_binary(const ObservationalDataset& ds, const char* who);

}  // namespace causalkit

#endif  // CAUSALKIT_CORE_HPP_
