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

#include "causalkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace causalkit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSeparationDetected: return "SeparationDetected";
    case ErrorCode::kNoVariationInD: return "NoVariationInD";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kSigmaFloor: return "SigmaFloor";
    case ErrorCode::kAllUnitsTrimmed: return "AllUnitsTrimmed";
    case ErrorCode::kEmptyStratumArm: return "EmptyStratumArm";
    case ErrorCode::kEmptyTreatmentArm: return "EmptyTreatmentArm";
    case ErrorCode::kZeroPropensity: return "ZeroPropensity";
    case ErrorCode::kEmptyDoseGroup: return "EmptyDoseGroup";
    case ErrorCode::kNoUsableStratum: return "NoUsableStratum";
    case ErrorCode::kInsufficientMatches: return "InsufficientMatches";
    case ErrorCode::kNoWithinVariation: return "NoWithinVariation";
    case ErrorCode::kTooFewPeriods: return "TooFewPeriods";
    case ErrorCode::kWeakOrZeroFirstStage: return "WeakOrZeroFirstStage";
    case ErrorCode::kOrderConditionViolated: return "OrderConditionViolated";
    case ErrorCode::kEmptyCell: return "EmptyCell";
    case ErrorCode::kDegenerateProblem: return "DegenerateProblem";
    case ErrorCode::kOneSidedData: return "OneSidedData";
    case ErrorCode::kNoFirstStageJump: return "NoFirstStageJump";
    case ErrorCode::kTooManyFailedReplicates: return "TooManyFailedReplicates";
    case ErrorCode::kMissingCoefCovariance: return "MissingCoefCovariance";
    case ErrorCode::kUnknownCase: return "UnknownCase";
    case ErrorCode::kTooManyFailedRuns: return "TooManyFailedRuns";
    case ErrorCode::kMissingReferenceCell: return "MissingReferenceCell";
  }
  return "Unknown";
}

bool Error::is_input_error() const noexcept {
  switch (code_) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kNonFiniteValue:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kUnknownColumn:
    case ErrorCode::kParseError:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kUnknownCase:
    case ErrorCode::kMissingReferenceCell:
      return true;
    default:
      return false;
  }
}

std::string_view treatment_kind_name(TreatmentKind kind) {
  switch (kind) {
    case TreatmentKind::kBinary: return "binary";
    case TreatmentKind::kMultivalued: return "multivalued";
    case TreatmentKind::kContinuous: return "continuous";
  }
  return "unknown";
}

bool is_binary_coded(const VectorXd& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double t) { return t == 0.0 || t == 1.0; });
}

void require_binary(const ObservationalDataset& ds, const char* who) {
  if (ds.treatment_kind != TreatmentKind::kBinary) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(who) + " requires a binary treatment");
  }
}

namespace {

void require_finite(const auto& m, const char* name) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue,
                std::string("column '") + name + "' has missing or non-finite values");
  }
}

}  // namespace

bool ObservationalDataset::operator==(const ObservationalDataset& o) const {
  if (treatment_kind != o.treatment_kind || levels != o.levels) return false;
  if (y.size() != o.y.size() || x.rows() != o.x.rows() ||
      x.cols() != o.x.cols() || z.has_value() != o.z.has_value()) {
    return false;
  }
  if (y != o.y || d != o.d || x != o.x) return false;
  if (z && (z->cols() != o.z->cols() || *z != *o.z)) return false;
  return true;
}

ObservationalDataset validate(RawColumns raw, std::optional<TreatmentKind> kind,
                              std::vector<double> levels) {
  const Index n = raw.y.size();
  if (n == 0) throw Error(ErrorCode::kEmptyDataset, "no rows");
  if (raw.d.size() != n) {
    throw Error(ErrorCode::kLengthMismatch,
                "outcome has " + std::to_string(n) + " rows, treatment has " +
                    std::to_string(raw.d.size()));
  }
  if (raw.x.size() == 0 && raw.x.rows() == 0) raw.x.resize(n, 0);
  if (raw.x.rows() != n) {
    throw Error(ErrorCode::kLengthMismatch, "covariate matrix has " +
                                                std::to_string(raw.x.rows()) +
                                                " rows, expected " + std::to_string(n));
  }
  if (raw.z && raw.z->rows() != n) {
    throw Error(ErrorCode::kLengthMismatch, "instrument matrix has " +
                                                std::to_string(raw.z->rows()) +
                                                " rows, expected " + std::to_string(n));
  }
  if (n < 2) throw Error(ErrorCode::kEmptyDataset, "need at least two rows");
  require_finite(raw.y, "outcome");
  require_finite(raw.d, "treatment");
  require_finite(raw.x, "covariates");
  if (raw.z) require_finite(*raw.z, "instruments");

  ObservationalDataset ds;
  ds.y = std::move(raw.y);
  ds.d = std::move(raw.d);
  ds.x = std::move(raw.x);
  ds.z = std::move(raw.z);

  const TreatmentKind resolved =
      kind.value_or(is_binary_coded(ds.d) ? TreatmentKind::kBinary
                                          : TreatmentKind::kContinuous);
  if (resolved == TreatmentKind::kBinary && !is_binary_coded(ds.d)) {
    throw Error(ErrorCode::kInvalidArgument,
                "binary treatment must be coded 0/1");
  }
  if (resolved == TreatmentKind::kMultivalued) {
    if (levels.empty()) {
      std::set<double> seen(ds.d.begin(), ds.d.end());
      levels.assign(seen.begin(), seen.end());
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double v : ds.d) {
      if (!std::binary_search(levels.begin(), levels.end(), v)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "treatment value " + std::to_string(v) +
                        " is not a declared level");
      }
    }
    ds.levels = std::move(levels);
  }
  ds.treatment_kind = resolved;
  return ds;
}

ObservationalDataset validate(const ObservationalDataset& ds) {
  return validate(RawColumns{ds.y, ds.d, ds.x, ds.z}, ds.treatment_kind,
                  ds.levels);
}

ObservationalDataset take_rows(const ObservationalDataset& ds,
                               std::span<const Index> rows) {
  ObservationalDataset out;
  const Index m = static_cast<Index>(rows.size());
  out.y.resize(m);
  out.d.resize(m);
  out.x.resize(m, ds.x.cols());
  if (ds.z) out.z = MatrixXd(m, ds.z->cols());
  for (Index r = 0; r < m; ++r) {
    const Index i = rows[r];
    out.y(r) = ds.y(i);
    out.d(r) = ds.d(i);
    out.x.row(r) = ds.x.row(i);
    if (ds.z) out.z->row(r) = ds.z->row(i);
  }
  out.treatment_kind = ds.treatment_kind;
  out.levels = ds.levels;
  return out;
}

PanelDataset validate_panel(std::vector<std::int64_t> unit,
                            std::vector<std::int64_t> time, VectorXd y,
                            VectorXd d, MatrixXd x) {
  const Index n = y.size();
  if (n == 0) throw Error(ErrorCode::kEmptyDataset, "no rows");
  if (static_cast<Index>(unit.size()) != n ||
      static_cast<Index>(time.size()) != n || d.size() != n) {
    throw Error(ErrorCode::kLengthMismatch,
                "unit, time, outcome and treatment lengths differ");
  }
  if (x.rows() == 0 && x.cols() == 0) x.resize(n, 0);
  if (x.rows() != n) {
    throw Error(ErrorCode::kLengthMismatch, "covariate rows differ from outcome");
  }
  require_finite(y, "outcome");
  require_finite(d, "treatment");
  require_finite(x, "covariates");

  PanelDataset pds;
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (Index i = 0; i < n; ++i) {
    auto [it, inserted] = slot.try_emplace(unit[i], pds.groups.size());
    if (inserted) pds.groups.emplace_back();
    auto& rows = pds.groups[it->second];
    if (!rows.empty() && time[rows.back()] >= time[i]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "times must be strictly increasing within unit " +
                      std::to_string(unit[i]));
    }
    rows.push_back(i);
  }
  pds.unit = std::move(unit);
  pds.time = std::move(time);
  pds.y = std::move(y);
  pds.d = std::move(d);
  pds.x = std::move(x);
  return pds;
}

PanelDataset take_units(const PanelDataset& pds, std::span<const Index> units) {
  std::vector<Index> rows;
  for (Index g : units) {
    rows.insert(rows.end(), pds.groups[g].begin(), pds.groups[g].end());
  }
  const Index m = static_cast<Index>(rows.size());
  std::vector<std::int64_t> unit(m), time(m);
  VectorXd y(m), d(m);
  MatrixXd x(m, pds.x.cols());
  Index r = 0;
  for (std::size_t k = 0; k < units.size(); ++k) {
    for (Index i : pds.groups[units[k]]) {
      unit[r] = static_cast<std::int64_t>(k);
      time[r] = pds.time[i];
      y(r) = pds.y(i);
      d(r) = pds.d(i);
      x.row(r) = pds.x.row(i);
      ++r;
    }
  }
  return validate_panel(std::move(unit), std::move(time), std::move(y),
                        std::move(d), std::move(x));
}

void CausalEstimate::set_variance(double v) {
  if (!std::isfinite(v) || v < 0.0) return;
  variance = v;
  const double half = 1.959963984540054 * std::sqrt(v);
  ci = std::make_pair(point - half, point + half);
}

CausalEstimate difference_in_means(const ObservationalDataset& ds) {
  require_binary(ds, "difference_in_means");
  double s1 = 0.0, s0 = 0.0;
  Index n1 = 0, n0 = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    if (ds.d(i) == 1.0) {
      s1 += ds.y(i);
      ++n1;
    } else {
      s0 += ds.y(i);
      ++n0;
    }
  }
  if (n1 == 0 || n0 == 0) {
    throw Error(ErrorCode::kEmptyTreatmentArm,
                n1 == 0 ? "no treated units" : "no control units");
  }
  const double m1 = s1 / n1, m0 = s0 / n0;
  double v1 = 0.0, v0 = 0.0;
  for (Index i = 0; i < ds.n(); ++i) {
    const double r = ds.y(i) - (ds.d(i) == 1.0 ? m1 : m0);
    (ds.d(i) == 1.0 ? v1 : v0) += r * r;
  }
  CausalEstimate est;
  est.method = "difference_in_means";
  est.point = m1 - m0;
  est.n_used = ds.n();
  if (n1 > 1 && n0 > 1) {
    est.set_variance(v1 / (n1 - 1) / n1 + v0 / (n0 - 1) / n0);
  }
  est.diagnostics["n_treated"] = static_cast<double>(n1);
  est.diagnostics["n_control"] = static_cast<double>(n0);
  return est;
}

}  // namespace causalkit
