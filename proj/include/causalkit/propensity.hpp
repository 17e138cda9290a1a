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

#ifndef CAUSALKIT_PROPENSITY_HPP_
#define CAUSALKIT_PROPENSITY_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "causalkit/core.hpp"
#include "causalkit/regress.hpp"

namespace causalkit {

enum class PropensityKind { kBinaryLogistic, kGpsNormal };

// Fitted assignment model.
//
// For kBinaryLogistic, scores[i] = P(D = level | x_i) where level is 1 for a
// binary treatment or a chosen dose for a multivalued one (one-vs-rest fit).
// For kGpsNormal, scores[i] is the conditional normal density of d_i.
struct PropensityFit {
  PropensityKind kind = PropensityKind::kBinaryLogistic;
  VectorXd scores;
  LinearFit model;  // empty coef when the scores were supplied externally
  double sigma = 0.0;
  double level = 1.0;
  std::pair<double, double> trim_bounds{0.0, 1.0};
  Index dropped = 0;
};

inline constexpr double kDefaultTrimLo = 0.01;
inline constexpr double kDefaultTrimHi = 0.99;

// Logistic model of d on (1, x).
PropensityFit estimate_propensity_binary(const ObservationalDataset& ds);

// Logistic model of 1[d == level] on (1, x); multivalued treatments.
PropensityFit estimate_propensity_level(const ObservationalDataset& ds,
                                        double level);

// Homoscedastic normal model d | x ~ N((1, x)'a, sigma^2).
PropensityFit estimate_gps_normal(const ObservationalDataset& ds);

// Wraps externally produced probabilities (e.g. a deliberately wrong model).
PropensityFit propensity_from_scores(VectorXd scores, double level = 1.0);

// P(D = dose | x_i) (or the density at d_i for GPS) for a unit whose
// received dose is `dose`.
double propensity_at(const PropensityFit& fit, Index i, double dose);

// Units with score in [lo, hi]; the returned fit holds only their scores.
std::pair<PropensityFit, std::vector<Index>> trim_overlap(
    const PropensityFit& fit, double lo = kDefaultTrimLo,
    double hi = kDefaultTrimHi);

// Equal-count strata of the score: stable sort, stratum = rank*J/n.
std::vector<int> stratify_by_score(const VectorXd& scores, int n_strata);

struct CovariateBalance {
  Index column = 0;
  double overall_smd = 0.0;
  double stratified_smd = 0.0;  // size-weighted over strata with both arms
};

struct BalanceTable {
  std::vector<CovariateBalance> covariates;
  int undefined_strata = 0;  // strata lacking an arm; excluded, not fatal
};

// Standardized mean differences |mean_1 - mean_0| / s, where s is the
// overall pooled within-arm standard deviation, computed on the whole
// sample and averaged within propensity strata.
BalanceTable balance_diagnostic(const ObservationalDataset& ds,
                                const PropensityFit& fit, int n_strata = 5);

}  // namespace causalkit

#endif  // CAUSALKIT_PROPENSITY_HPP_
