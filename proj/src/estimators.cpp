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

#include "causalkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalkit/variance.hpp"

namespace causalkit {

namespace {

void require_scores_match(const ObservationalDataset& ds, const PropensityFit& ps) {
  if (ps.scores.size() != ds.n()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "propensity scores cover " + std::to_string(ps.scores.size()) +
                    " units, dataset has " + std::to_string(ds.n()));
  }
}

void require_discrete(const ObservationalDataset& ds, const char* who) {
  if (ds.treatment_kind == TreatmentKind::kContinuous) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(who) +
                    " needs a binary or multivalued treatment; use the outcome "
                    "model or augmented estimator for continuous doses");
  }
}

double guarded_propensity(const PropensityFit& ps, Index i, double dose) {
  const double p = propensity_at(ps, i, dose);
  if (!(p >= kPropensityFloor)) {
    throw Error(ErrorCode::kZeroPropensity,
                "unit " + std::to_string(i) + " has propensity " + std::to_string(p) +
                    " for dose " + std::to_string(dose));
  }
  return p;
}

CausalEstimate make_estimate(std::string method, Estimand estimand, double dose,
                             double reference, double point, Index n_used) {
  CausalEstimate e;
  e.method = std::move(method);
  e.estimand = estimand;
  e.dose = dose;
  e.reference = reference;
  e.point = point;
  e.n_used = n_used;
  return e;
}

}  // namespace

OrSpec OrSpec::all_covariates(const ObservationalDataset& ds) {
  OrSpec spec;
  spec.covariates.resize(static_cast<std::size_t>(ds.p()));
  std::iota(spec.covariates.begin(), spec.covariates.end(), Index{0});
  return spec;
}

MatrixXd OutcomeModel::design_at(const ObservationalDataset& ds, double dose) const {
  const Index k = static_cast<Index>(spec.covariates.size());
  const Index width = 2 + k + (spec.interactions_with_d ? k : 0);
  MatrixXd m(ds.n(), width);
  m.col(0).setOnes();
  m.col(1).setConstant(dose);
  for (Index j = 0; j < k; ++j) {
    const Index c = spec.covariates[static_cast<std::size_t>(j)];
    m.col(2 + j) = ds.x.col(c);
    if (spec.interactions_with_d) m.col(2 + k + j) = dose * ds.x.col(c);
  }
  return m;
}

VectorXd OutcomeModel::predict_at(const ObservationalDataset& ds, double dose) const {
  return predict(fit, design_at(ds, dose));
}

OutcomeModel fit_outcome_model(const ObservationalDataset& ds, const OrSpec& spec) {
  for (Index c : spec.covariates) {
    if (c < 0 || c >= ds.p()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "covariate index " + std::to_string(c) + " out of range");
    }
  }
  OutcomeModel model{spec, {}};
  // Observed design: same layout as design_at but with each unit's own dose.
  const Index k = static_cast<Index>(spec.covariates.size());
  MatrixXd design = model.design_at(ds, 0.0);
  design.col(1) = ds.d;
  if (spec.interactions_with_d) {
    for (Index j = 0; j < k; ++j) {
      design.col(2 + k + j) =
          ds.d.cwiseProduct(ds.x.col(spec.covariates[static_cast<std::size_t>(j)]));
    }
  }
  model.fit = spec.link == Link::kIdentity ? fit_ols(design, ds.y)
                                           : fit_logistic(design, ds.y);
  return model;
}

CausalEstimate apo_or(const ObservationalDataset& ds, const OrSpec& spec, double dose) {
  const OutcomeModel model = fit_outcome_model(ds, spec);
  const MatrixXd design = model.design_at(ds, dose);
  CausalEstimate e = make_estimate("or", Estimand::kAPO, dose, dose,
                                   predict(model.fit, design).mean(), ds.n());
  if (model.fit.coef_cov.size() > 0) {
    const VectorXd g = mean_prediction_gradient(model.fit, design);
    const VectorXd pred = predict(model.fit, design);
    const double spread = (pred.array() - pred.mean()).square().mean();
    e.set_variance(spread / static_cast<double>(ds.n()) + g.dot(model.fit.coef_cov * g));
  }
  return e;
}

CausalEstimate ate_or(const ObservationalDataset& ds, const OrSpec& spec, double dose,
                      double reference) {
  const OutcomeModel model = fit_outcome_model(ds, spec);
  const MatrixXd at_dose = model.design_at(ds, dose);
  const MatrixXd at_ref = model.design_at(ds, reference);
  const double point =
      (predict(model.fit, at_dose) - predict(model.fit, at_ref)).mean();
  CausalEstimate e = make_estimate("or", Estimand::kATE, dose, reference, point, ds.n());
  if (model.fit.coef_cov.size() > 0) {
    e.set_variance(delta_variance_contrast(model.fit, at_dose, at_ref));
  }
  e.diagnostics["coef_d"] = model.fit.coef(1);
  return e;
}

CausalEstimate apo_ipw(const ObservationalDataset& ds, const PropensityFit& ps,
                       double dose) {
  require_discrete(ds, "apo_ipw");
  require_scores_match(ds, ps);
  double sum = 0.0;
  Index hits = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    if (ds.d(i) != dose) continue;
    sum += ds.y(i) / guarded_propensity(ps, i, dose);
    ++hits;
  }
  if (hits == 0) {
    throw Error(ErrorCode::kEmptyDoseGroup,
                "no unit received dose " + std::to_string(dose));
  }
  CausalEstimate e = make_estimate("ipw", Estimand::kAPO, dose, dose,
                                   sum / static_cast<double>(ds.n()), ds.n());
  e.diagnostics["n_at_dose"] = static_cast<double>(hits);
  return e;
}

CausalEstimate ate_ipw(const ObservationalDataset& ds, const PropensityFit& ps,
                       double dose, double reference) {
  require_discrete(ds, "ate_ipw");
  require_scores_match(ds, ps);
  if (dose == reference) {
    return make_estimate("ipw", Estimand::kATE, dose, reference, 0.0, ds.n());
  }
  if (ds.treatment_kind == TreatmentKind::kBinary) {
    if (!((dose == 1.0 && reference == 0.0) || (dose == 0.0 && reference == 1.0))) {
      throw Error(ErrorCode::kInvalidArgument, "binary doses must be 0 and 1");
    }
    const double treated = apo_ipw(ds, ps, 1.0).point;
    const double control = apo_ipw(ds, ps, 0.0).point;
    const double sign = dose == 1.0 ? 1.0 : -1.0;
    return make_estimate("ipw", Estimand::kATE, dose, reference,
                         sign * (treated - control), ds.n());
  }
  if (ps.level != dose) {
    throw Error(ErrorCode::kInvalidArgument,
                "multivalued contrast needs the propensity fit for dose " +
                    std::to_string(dose));
  }
  double sum = 0.0;
  Index hits = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    const double p = ps.scores(i);
    if (ds.d(i) == dose) {
      if (!(p >= kPropensityFloor)) {
        throw Error(ErrorCode::kZeroPropensity, "unit " + std::to_string(i));
      }
      sum += ds.y(i) / p;
      ++hits;
    } else {
      if (!(1.0 - p >= kPropensityFloor)) {
        throw Error(ErrorCode::kZeroPropensity, "unit " + std::to_string(i));
      }
      sum -= ds.y(i) / (1.0 - p);
    }
  }
  if (hits == 0 || hits == ds.n()) {
    throw Error(ErrorCode::kEmptyDoseGroup, "dose group or its complement is empty");
  }
  return make_estimate("ipw", Estimand::kATE, dose, reference,
                       sum / static_cast<double>(ds.n()), ds.n());
}

CausalEstimate ate_psr(const ObservationalDataset& ds, const PropensityFit& ps,
                       double dose, double reference, int poly_degree) {
  require_binary(ds, "ate_psr");
  require_scores_match(ds, ps);
  if (poly_degree < 1) throw Error(ErrorCode::kInvalidArgument, "poly_degree must be >= 1");
  if (dose == reference) {
    return make_estimate("psr", Estimand::kATE, dose, reference, 0.0, ds.n());
  }
  // Centred powers of the score; a constant score contributes nothing.
  std::vector<VectorXd> terms;
  for (int k = 1; k <= poly_degree; ++k) {
    VectorXd t = ps.scores.array().pow(k).matrix();
    if (t.maxCoeff() - t.minCoeff() <= 1e-12 * std::max(1.0, t.cwiseAbs().maxCoeff())) {
      continue;
    }
    t.array() -= t.mean();
    terms.push_back(std::move(t));
  }
  const Index k = static_cast<Index>(terms.size());
  const auto build = [&](const VectorXd& dcol) {
    MatrixXd m(ds.n(), 2 + 2 * k);
    m.col(0).setOnes();
    m.col(1) = dcol;
    for (Index j = 0; j < k; ++j) {
      m.col(2 + j) = terms[static_cast<std::size_t>(j)];
      m.col(2 + k + j) = dcol.cwiseProduct(terms[static_cast<std::size_t>(j)]);
    }
    return m;
  };
  const LinearFit fit = fit_ols(build(ds.d), ds.y);
  const VectorXd at_dose = predict(fit, build(VectorXd::Constant(ds.n(), dose)));
  const VectorXd at_ref = predict(fit, build(VectorXd::Constant(ds.n(), reference)));
  CausalEstimate e = make_estimate("psr", Estimand::kATE, dose, reference,
                                   (at_dose - at_ref).mean(), ds.n());
  e.diagnostics["score_terms"] = static_cast<double>(k);
  return e;
}

CausalEstimate stratified_difference(const VectorXd& y, const VectorXd& d,
                                     const std::vector<int>& stratum) {
  if (y.size() != d.size() || static_cast<std::size_t>(y.size()) != stratum.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "stratum labels do not match data");
  }
  const int n_strata =
      stratum.empty() ? 0 : *std::max_element(stratum.begin(), stratum.end()) + 1;
  std::vector<double> s1(static_cast<std::size_t>(n_strata), 0.0), s0 = s1;
  std::vector<Index> n1(static_cast<std::size_t>(n_strata), 0), n0 = n1;
  for (Index i = 0; i < y.size(); ++i) {
    const auto j = static_cast<std::size_t>(stratum[static_cast<std::size_t>(i)]);
    if (d(i) == 1.0) {
      s1[j] += y(i);
      ++n1[j];
    } else {
      s0[j] += y(i);
      ++n0[j];
    }
  }
  double acc = 0.0;
  Index used = 0;
  int excluded = 0;
  for (std::size_t j = 0; j < s1.size(); ++j) {
    if (n1[j] + n0[j] == 0) continue;
    if (n1[j] == 0 || n0[j] == 0) {
      ++excluded;
      continue;
    }
    const Index size = n1[j] + n0[j];
    acc += static_cast<double>(size) * (s1[j] / n1[j] - s0[j] / n0[j]);
    used += size;
  }
  if (used == 0) {
    throw Error(ErrorCode::kNoUsableStratum, "no stratum contains both arms");
  }
  CausalEstimate e = make_estimate("stratification", Estimand::kATE, 1.0, 0.0,
                                   acc / static_cast<double>(used), used);
  e.diagnostics["strata_excluded"] = excluded;
  return e;
}

CausalEstimate ate_stratification(const ObservationalDataset& ds,
                                  const PropensityFit& ps, int n_strata) {
  require_binary(ds, "ate_stratification");
  require_scores_match(ds, ps);
  CausalEstimate e =
      stratified_difference(ds.y, ds.d, stratify_by_score(ps.scores, n_strata));
  e.diagnostics["n_strata"] = n_strata;
  return e;
}

CausalEstimate ate_matching(const ObservationalDataset& ds, const PropensityFit& ps,
                            int n_matches) {
  require_binary(ds, "ate_matching");
  require_scores_match(ds, ps);
  if (n_matches < 1) throw Error(ErrorCode::kInvalidArgument, "M must be >= 1");
  const VectorXd& s = ps.scores;

  // Each arm sorted by (score, row index).
  std::vector<Index> arm[2];
  for (Index i = 0; i < ds.n(); ++i) arm[ds.d(i) == 1.0 ? 1 : 0].push_back(i);
  for (auto& a : arm) {
    if (static_cast<int>(a.size()) < n_matches) {
      throw Error(ErrorCode::kInsufficientMatches,
                  "an arm has " + std::to_string(a.size()) + " units, M = " +
                      std::to_string(n_matches));
    }
    std::sort(a.begin(), a.end(), [&](Index u, Index v) {
      return s(u) < s(v) || (s(u) == s(v) && u < v);
    });
  }

  std::vector<std::pair<double, Index>> candidates;
  const auto matched_mean = [&](Index i, const std::vector<Index>& pool) {
    const double target = s(i);
    const auto pos = std::lower_bound(
        pool.begin(), pool.end(), target,
        [&](Index u, double t) { return s(u) < t; });
    // Greedy expansion finds the M nearest distances; then everything tied
    // with the M-th distance is collected so ties resolve by row index.
    std::ptrdiff_t left = pos - pool.begin() - 1;
    std::ptrdiff_t right = pos - pool.begin();
    const auto size = static_cast<std::ptrdiff_t>(pool.size());
    double kth = 0.0;
    for (int taken = 0; taken < n_matches; ++taken) {
      const double dl = left >= 0 ? target - s(pool[static_cast<std::size_t>(left)])
                                  : std::numeric_limits<double>::infinity();
      const double dr = right < size ? s(pool[static_cast<std::size_t>(right)]) - target
                                     : std::numeric_limits<double>::infinity();
      if (dl <= dr) {
        kth = dl;
        --left;
      } else {
        kth = dr;
        ++right;
      }
    }
    candidates.clear();
    for (std::ptrdiff_t l = left + 1; l < right; ++l) {
      const Index u = pool[static_cast<std::size_t>(l)];
      candidates.emplace_back(std::abs(s(u) - target), u);
    }
    for (; left >= 0 && target - s(pool[static_cast<std::size_t>(left)]) <= kth; --left) {
      const Index u = pool[static_cast<std::size_t>(left)];
      candidates.emplace_back(target - s(u), u);
    }
    for (; right < size && s(pool[static_cast<std::size_t>(right)]) - target <= kth; ++right) {
      const Index u = pool[static_cast<std::size_t>(right)];
      candidates.emplace_back(s(u) - target, u);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + n_matches,
                      candidates.end());
    double acc = 0.0;
    for (int m = 0; m < n_matches; ++m) acc += ds.y(candidates[static_cast<std::size_t>(m)].second);
    return acc / n_matches;
  };

  double total = 0.0;
  for (Index i = 0; i < ds.n(); ++i) {
    if (ds.d(i) == 1.0) {
      total += ds.y(i) - matched_mean(i, arm[0]);
    } else {
      total += matched_mean(i, arm[1]) - ds.y(i);
    }
  }
  CausalEstimate e = make_estimate("matching", Estimand::kATE, 1.0, 0.0,
                                   total / static_cast<double>(ds.n()), ds.n());
  e.diagnostics["matches"] = n_matches;
  return e;
}

CausalEstimate ate_dr(const ObservationalDataset& ds, const OrSpec& or_spec,
                      const PropensityFit& ps, double dose, double reference) {
  return ate_dr(ds, or_spec, ps, ps, dose, reference);
}

CausalEstimate ate_dr(const ObservationalDataset& ds, const OrSpec& or_spec,
                      const PropensityFit& ps, const PropensityFit& ps_reference,
                      double dose, double reference) {
  require_scores_match(ds, ps);
  require_scores_match(ds, ps_reference);
  const OutcomeModel model = fit_outcome_model(ds, or_spec);
  const auto augmented_mean = [&](const PropensityFit& fit, double level) {
    const VectorXd m = model.predict_at(ds, level);
    double acc = 0.0;
    for (Index i = 0; i < ds.n(); ++i) {
      acc += m(i);
      if (ds.d(i) == level) {
        acc += (ds.y(i) - m(i)) / guarded_propensity(fit, i, level);
      }
    }
    return acc / static_cast<double>(ds.n());
  };
  const double mu_dose = augmented_mean(ps, dose);
  const double mu_ref = dose == reference ? mu_dose : augmented_mean(ps_reference, reference);
  CausalEstimate e = make_estimate("dr", Estimand::kATE, dose, reference,
                                   mu_dose - mu_ref, ds.n());
  e.diagnostics["mu_dose"] = mu_dose;
  e.diagnostics["mu_reference"] = mu_ref;
  return e;
}

}  // namespace causalkit
