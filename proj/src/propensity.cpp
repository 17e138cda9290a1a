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

#include "causalkit/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace causalkit {

namespace {

constexpr double kSigmaFloor = 1e-12;

PropensityFit logistic_scores(const ObservationalDataset& ds, const VectorXd& target,
                              double level) {
  PropensityFit fit;
  fit.kind = PropensityKind::kBinaryLogistic;
  const MatrixXd design = with_intercept(ds.x);
  fit.model = fit_logistic(design, target);
  fit.scores = predict(fit.model, design);
  fit.level = level;
  return fit;
}

}  // namespace

PropensityFit estimate_propensity_binary(const ObservationalDataset& ds) {
  require_binary(ds, "estimate_propensity_binary");
  return logistic_scores(ds, ds.d, 1.0);
}

PropensityFit estimate_propensity_level(const ObservationalDataset& ds,
                                        double level) {
  if (ds.treatment_kind == TreatmentKind::kContinuous) {
    throw Error(ErrorCode::kInvalidArgument,
                "level propensity needs a binary or multivalued treatment");
  }
  const VectorXd target =
      (ds.d.array() == level).select(VectorXd::Ones(ds.n()), 0.0);
  return logistic_scores(ds, target, level);
}

PropensityFit estimate_gps_normal(const ObservationalDataset& ds) {
  if (ds.treatment_kind != TreatmentKind::kContinuous) {
    throw Error(ErrorCode::kInvalidArgument,
                "generalized propensity score needs a continuous treatment");
  }
  PropensityFit fit;
  fit.kind = PropensityKind::kGpsNormal;
  const MatrixXd design = with_intercept(ds.x);
  fit.model = fit_ols(design, ds.d);
  const double dof = static_cast<double>(ds.n() - design.cols());
  fit.sigma = dof > 0 ? std::sqrt(fit.model.residuals.squaredNorm() / dof) : 0.0;
  if (!(fit.sigma >= kSigmaFloor)) {
    throw Error(ErrorCode::kSigmaFloor,
                "residual scale of the dose model is below 1e-12");
  }
  const double norm = 1.0 / (fit.sigma * std::sqrt(2.0 * std::numbers::pi));
  fit.scores = fit.model.residuals.unaryExpr([&](double r) {
    const double u = r / fit.sigma;
    return norm * std::exp(-0.5 * u * u);
  });
  fit.trim_bounds = {0.0, std::numeric_limits<double>::infinity()};
  return fit;
}

PropensityFit propensity_from_scores(VectorXd scores, double level) {
  if ((scores.array() <= 0.0).any() || (scores.array() >= 1.0).any() ||
      !scores.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                "propensity scores must lie strictly inside (0, 1)");
  }
  PropensityFit fit;
  fit.kind = PropensityKind::kBinaryLogistic;
  fit.scores = std::move(scores);
  fit.level = level;
  return fit;
}

double propensity_at(const PropensityFit& fit, Index i, double dose) {
  if (fit.kind == PropensityKind::kGpsNormal) return fit.scores(i);
  if (dose == fit.level) return fit.scores(i);
  if (fit.level == 1.0 && dose == 0.0) return 1.0 - fit.scores(i);
  throw Error(ErrorCode::kInvalidArgument,
              "propensity fit for level " + std::to_string(fit.level) +
                  " cannot score dose " + std::to_string(dose));
}

std::pair<PropensityFit, std::vector<Index>> trim_overlap(
    const PropensityFit& fit, double lo, double hi) {
  if (fit.kind != PropensityKind::kBinaryLogistic) {
    throw Error(ErrorCode::kInvalidArgument, "trimming applies to probability scores");
  }
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "trim bounds must satisfy 0 <= lo < hi <= 1");
  }
  std::vector<Index> kept;
  for (Index i = 0; i < fit.scores.size(); ++i) {
    if (fit.scores(i) >= lo && fit.scores(i) <= hi) kept.push_back(i);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kAllUnitsTrimmed,
                "no score inside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  PropensityFit out = fit;
  out.scores.resize(static_cast<Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.scores(static_cast<Index>(k)) = fit.scores(kept[k]);
  }
  out.trim_bounds = {lo, hi};
  out.dropped = fit.dropped + fit.scores.size() - static_cast<Index>(kept.size());
  return {std::move(out), std::move(kept)};
}

std::vector<int> stratify_by_score(const VectorXd& scores, int n_strata) {
  if (n_strata < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one stratum");
  const Index n = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a) < scores(b); });
  std::vector<int> stratum(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    stratum[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
        static_cast<int>((r * n_strata) / n);
  }
  return stratum;
}

BalanceTable balance_diagnostic(const ObservationalDataset& ds,
                                const PropensityFit& fit, int n_strata) {
  require_binary(ds, "balance_diagnostic");
  if (n_strata < 2) throw Error(ErrorCode::kInvalidArgument, "need n_strata >= 2");
  if (fit.scores.size() != ds.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "scores do not match dataset rows");
  }
  const Index treated = (ds.d.array() == 1.0).count();
  if (treated == 0 || treated == ds.n()) {
    throw Error(ErrorCode::kEmptyTreatmentArm, "balance needs both arms");
  }
  const auto strata = stratify_by_score(fit.scores, n_strata);

  BalanceTable table;
  std::vector<bool> usable(static_cast<std::size_t>(n_strata), false);
  std::vector<Index> size(static_cast<std::size_t>(n_strata), 0);
  {
    std::vector<Index> n1(usable.size(), 0), n0(usable.size(), 0);
    for (Index i = 0; i < ds.n(); ++i) {
      const auto j = static_cast<std::size_t>(strata[static_cast<std::size_t>(i)]);
      ++size[j];
      ++(ds.d(i) == 1.0 ? n1 : n0)[j];
    }
    for (std::size_t j = 0; j < usable.size(); ++j) {
      usable[j] = n1[j] > 0 && n0[j] > 0;
      if (!usable[j]) ++table.undefined_strata;
    }
  }

  for (Index c = 0; c < ds.p(); ++c) {
    const auto col = ds.x.col(c);
    CovariateBalance b;
    b.column = c;
    if (col.maxCoeff() == col.minCoeff()) {
      table.covariates.push_back(b);
      continue;
    }
    double s1 = 0, s0 = 0, q1 = 0, q0 = 0;
    Index n1 = 0, n0 = 0;
    std::vector<double> t_sum(usable.size(), 0), c_sum(usable.size(), 0);
    std::vector<Index> t_n(usable.size(), 0), c_n(usable.size(), 0);
    for (Index i = 0; i < ds.n(); ++i) {
      const double v = col(i);
      const auto j = static_cast<std::size_t>(strata[static_cast<std::size_t>(i)]);
      if (ds.d(i) == 1.0) {
        s1 += v; q1 += v * v; ++n1; t_sum[j] += v; ++t_n[j];
      } else {
        s0 += v; q0 += v * v; ++n0; c_sum[j] += v; ++c_n[j];
      }
    }
    const double m1 = s1 / n1, m0 = s0 / n0;
    const double v1 = n1 > 1 ? (q1 - n1 * m1 * m1) / (n1 - 1) : 0.0;
    const double v0 = n0 > 1 ? (q0 - n0 * m0 * m0) / (n0 - 1) : 0.0;
    const double pooled = std::sqrt(std::max(0.0, 0.5 * (v1 + v0)));
    if (pooled == 0.0) {
      b.overall_smd = m1 == m0 ? 0.0 : std::numeric_limits<double>::infinity();
      b.stratified_smd = b.overall_smd;
      table.covariates.push_back(b);
      continue;
    }
    b.overall_smd = std::abs(m1 - m0) / pooled;
    double acc = 0.0, weight = 0.0;
    for (std::size_t j = 0; j < usable.size(); ++j) {
      if (!usable[j]) continue;
      const double diff = t_sum[j] / t_n[j] - c_sum[j] / c_n[j];
      acc += static_cast<double>(size[j]) * std::abs(diff) / pooled;
      weight += static_cast<double>(size[j]);
    }
    b.stratified_smd = weight > 0 ? acc / weight
                                  : std::numeric_limits<double>::quiet_NaN();
    table.covariates.push_back(b);
  }
  return table;
}

}  // namespace causalkit
