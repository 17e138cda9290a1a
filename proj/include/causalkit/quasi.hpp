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

#ifndef CAUSALKIT_QUASI_HPP_
#define CAUSALKIT_QUASI_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "causalkit/core.hpp"
#include "causalkit/regress.hpp"

namespace causalkit {

// ---- Instrumental variables ----

// Cov(z, y) / Cov(z, d) with a single instrument.
CausalEstimate iv_ratio(const VectorXd& y, const VectorXd& d, const VectorXd& z);

struct TwoStageFit {
  VectorXd coef;      // endogenous columns first, then exogenous
  MatrixXd coef_cov;  // from residuals y - [D, W] coef
  VectorXd residuals;
  double first_stage_f = 0.0;  // first endogenous column, excluded instruments
};

// Two-stage least squares. `exogenous` enters both stages (pass a column of
// ones for an intercept); `excluded` are the outside instruments.
TwoStageFit fit_2sls(const VectorXd& y, const MatrixXd& endogenous,
                     const MatrixXd& excluded, const MatrixXd& exogenous);

struct IvSpec {
  std::vector<Index> instrument_columns;   // columns of ds.z; empty = all
  std::vector<Index> exogenous_covariates; // columns of ds.x
  bool intercept = true;
};

// 2SLS with d endogenous; point is the coefficient on d.
CausalEstimate ate_2sls(const ObservationalDataset& ds, const IvSpec& spec);

// ---- Difference in differences ----

struct DidDataset {
  VectorXd y;
  std::vector<std::int64_t> group;   // 0/1 for the two-group design
  std::vector<std::int64_t> period;  // 0/1 for the two-period design
  MatrixXd x;                        // n x p, p may be zero
  std::optional<VectorXd> treated;   // group-time indicator, multiperiod only

  Index n() const { return y.size(); }
};

// Interaction coefficient of y on (1, group, period, group*period).
CausalEstimate ate_did(const DidDataset& dd);
// Same regression with the columns of dd.x appended.
CausalEstimate ate_did_covariates(const DidDataset& dd);
// Group dummies, period dummies, x and the treated indicator.
CausalEstimate ate_did_multiperiod(const DidDataset& dd);

// ---- Synthetic control ----

struct ScProblem {
  VectorXd x1;  // K predictors of the treated unit
  MatrixXd x0;  // K x J donor predictors
  VectorXd z1;  // pre-period treated outcomes
  MatrixXd z0;  // pre-period donor outcomes, T_pre x J
  VectorXd y1;  // post-period treated outcomes
  MatrixXd y0;  // post-period donor outcomes, T_post x J
};

struct ScResult {
  VectorXd weights;  // donor weights on the simplex
  VectorXd v;        // predictor importance, diagonal of V, sums to one
  VectorXd gap;      // y1 - y0 w
  double pre_loss = 0.0;
  CausalEstimate estimate;  // point = mean post-period gap
};

// argmin over the simplex of (x1 - x0 w)' diag(v) (x1 - x0 w).
VectorXd sc_weights(const VectorXd& x1, const MatrixXd& x0, const VectorXd& v_diag);

// Chooses diag(v) to minimize |z1 - z0 w(v)|^2.
ScResult sc_fit(const ScProblem& problem);

// Euclidean projection onto {w >= 0, sum w = 1}.
VectorXd project_to_simplex(const VectorXd& v);

// ---- Regression discontinuity ----

struct RddSpec {
  std::optional<double> bandwidth;  // keep |t - c| <= h
};

// y on (1, D, t - c, D (t - c)) with D = 1[t >= c]; point is the jump.
CausalEstimate rdd_sharp(const VectorXd& y, const VectorXd& t, double cutoff,
                         const RddSpec& spec = {});

// 2SLS: d endogenous, 1[t >= c] excluded, (1, t - c, 1[t >= c](t - c)) exogenous.
CausalEstimate rdd_fuzzy(const VectorXd& y, const VectorXd& t, const VectorXd& d,
                         double cutoff, const RddSpec& spec = {});

inline constexpr double kMinFirstStageJump = 0.05;

}  // namespace causalkit

#endif  // CAUSALKIT_QUASI_HPP_
