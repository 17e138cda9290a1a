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

#ifndef CAUSALKIT_ESTIMATORS_HPP_
#define CAUSALKIT_ESTIMATORS_HPP_

#include <vector>

#include "causalkit/core.hpp"
#include "causalkit/propensity.hpp"
#include "causalkit/regress.hpp"

namespace causalkit {

// Outcome-regression specification: y on (1, d, x_S[, d * x_S]).
struct OrSpec {
  std::vector<Index> covariates;
  bool interactions_with_d = false;
  Link link = Link::kIdentity;

  static OrSpec all_covariates(const ObservationalDataset& ds);
};

// Fitted outcome model together with the spec that built its design.
struct OutcomeModel {
  OrSpec spec;
  LinearFit fit;

  // Design rows for every unit with the treatment set to `dose`.
  MatrixXd design_at(const ObservationalDataset& ds, double dose) const;
  VectorXd predict_at(const ObservationalDataset& ds, double dose) const;
};

OutcomeModel fit_outcome_model(const ObservationalDataset& ds, const OrSpec& spec);

// Mean of model predictions with the dose held fixed at `dose`.
CausalEstimate apo_or(const ObservationalDataset& ds, const OrSpec& spec,
                      double dose);
// apo_or(dose) - apo_or(reference); identity-link fits carry a delta-method
// variance.
CausalEstimate ate_or(const ObservationalDataset& ds, const OrSpec& spec,
                      double dose, double reference);

inline constexpr double kPropensityFloor = 1e-12;

// Horvitz-Thompson mean (1/n) sum 1[d_i = dose] y_i / pi(dose | x_i).
CausalEstimate apo_ipw(const ObservationalDataset& ds, const PropensityFit& ps,
                       double dose);

// Binary: weights 1/pi and 1/(1 - pi). Multivalued: `ps` must be the
// one-vs-rest fit for `dose`; the contrast is dose versus all other levels
// and `reference` is kept only as a label.
CausalEstimate ate_ipw(const ObservationalDataset& ds, const PropensityFit& ps,
                       double dose, double reference);

// Regression of y on (1, d, pi, ..., pi^k, d*pi, ..., d*pi^k); constant
// score columns are dropped.
CausalEstimate ate_psr(const ObservationalDataset& ds, const PropensityFit& ps,
                       double dose, double reference, int poly_degree = 2);

// Size-weighted average of within-stratum mean differences. Strata that
// lack an arm are dropped and the weights renormalized.
CausalEstimate stratified_difference(const VectorXd& y, const VectorXd& d,
                                     const std::vector<int>& stratum);
CausalEstimate ate_stratification(const ObservationalDataset& ds,
                                  const PropensityFit& ps, int n_strata = 5);

// Nearest-neighbour matching on the score with replacement, M matches per
// unit, ties in distance going to the lowest row index.
CausalEstimate ate_matching(const ObservationalDataset& ds,
                            const PropensityFit& ps, int n_matches = 1);

// Augmented estimator
//   mu(d) = (1/n) sum [ m(d, x_i) + 1[d_i = d] / pi(d | x_i) (y_i - m(d, x_i)) ].
// `ps` scores the treated dose; `ps_reference` the reference dose (for a
// binary treatment both may be the same fit).
CausalEstimate ate_dr(const ObservationalDataset& ds, const OrSpec& or_spec,
                      const PropensityFit& ps, double dose, double reference);
CausalEstimate ate_dr(const ObservationalDataset& ds, const OrSpec& or_spec,
                      const PropensityFit& ps, const PropensityFit& ps_reference,
                      double dose, double reference);

}  // namespace causalkit

#endif  // CAUSALKIT_ESTIMATORS_HPP_
