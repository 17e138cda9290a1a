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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalkit/estimators.hpp"
#include "causalkit/rng.hpp"
#include "causalkit/simulate.hpp"
#include "doctest.h"

using namespace causalkit;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ObservationalDataset four_units() {
  return validate(RawColumns{vec({3, 5, 2, 4}), vec({1, 1, 0, 0}), {}, std::nullopt});
}

OrSpec using_columns(std::vector<Index> cols) {
  OrSpec s;
  s.covariates = std::move(cols);
  return s;
}

// Randomized design: constant true score, linear outcome.
ObservationalDataset randomized_linear(Index n, std::uint64_t seed, double share) {
  Stream s(seed);
  VectorXd y(n), d(n);
  MatrixXd x(n, 1);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = s.normal();
    d(i) = s.bernoulli(share) ? 1.0 : 0.0;
    y(i) = 1.0 + 2.0 * d(i) + 0.5 * x(i, 0) + s.normal();
  }
  return validate(RawColumns{y, d, x, std::nullopt});
}

}  // namespace

TEST_CASE("outcome regression reductions") {
  const auto ds = four_units();
  const OrSpec none;
  const double contrast = apo_or(ds, none, 1.0).point - apo_or(ds, none, 0.0).point;
  CHECK(contrast == doctest::Approx(difference_in_means(ds).point).epsilon(1e-12));
  CHECK(ate_or(ds, none, 1.0, 0.0).point ==
        doctest::Approx(difference_in_means(ds).point).epsilon(1e-12));
  CHECK(ate_or(ds, none, 1.0, 1.0).point == 0.0);

  const auto exact = validate(RawColumns{vec({3, 5, 7, 9}), vec({0, 1, 2, 3}), {}, std::nullopt});
  CHECK(apo_or(exact, none, 5.0).point == doctest::Approx(13.0));
}

TEST_CASE("outcome regression recovers a linear effect") {
  const auto ds = randomized_linear(10000, 1, 0.5);
  const auto e = ate_or(ds, using_columns({0}), 1.0, 0.0);
  CHECK(std::abs(e.point - 2.0) < 0.05);
  REQUIRE(e.variance);
  CHECK(*e.variance > 0.0);
  CHECK(code_of([&] { ate_or(ds, using_columns({3}), 1.0, 0.0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("outcome regression with interactions and logit link") {
  const auto ds = randomized_linear(2000, 2, 0.5);
  OrSpec inter = using_columns({0});
  inter.interactions_with_d = true;
  CHECK(std::abs(ate_or(ds, inter, 1.0, 0.0).point - 2.0) < 0.15);

  Stream s(3);
  const Index n = 3000;
  VectorXd y(n), d(n);
  MatrixXd x(n, 1);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = s.normal();
    d(i) = s.bernoulli(0.5) ? 1.0 : 0.0;
    y(i) = s.bernoulli(expit(-0.5 + 1.0 * d(i) + 0.5 * x(i, 0))) ? 1.0 : 0.0;
  }
  OrSpec logit = using_columns({0});
  logit.link = Link::kLogit;
  const auto ds2 = validate(RawColumns{y, d, x, std::nullopt});
  // Population risk difference by Monte Carlo integration over x.
  double truth = 0.0;
  Stream t(4);
  for (int i = 0; i < 200000; ++i) {
    const double xi = t.normal();
    truth += expit(0.5 + 0.5 * xi) - expit(-0.5 + 0.5 * xi);
  }
  truth /= 200000;
  CHECK(std::abs(ate_or(ds2, logit, 1.0, 0.0).point - truth) < 0.05);
}

TEST_CASE("inverse probability weighting by hand") {
  const auto ds = four_units();
  const auto half = propensity_from_scores(VectorXd::Constant(4, 0.5));
  CHECK(apo_ipw(ds, half, 1.0).point == doctest::Approx(4.0));
  CHECK(ate_ipw(ds, half, 1.0, 0.0).point == doctest::Approx(1.0));
  CHECK(ate_ipw(ds, half, 0.0, 1.0).point == doctest::Approx(-1.0));
  CHECK(ate_ipw(ds, half, 1.0, 1.0).point == 0.0);

  // Constant score equal to the treated share: mean of treated outcomes.
  const auto lopsided = validate(RawColumns{vec({3, 5, 2, 4}), vec({1, 0, 0, 0}), {}, std::nullopt});
  CHECK(apo_ipw(lopsided, propensity_from_scores(VectorXd::Constant(4, 0.25)), 1.0).point ==
        doctest::Approx(3.0));
}

TEST_CASE("inverse probability weighting errors") {
  const auto ds = four_units();
  const auto half = propensity_from_scores(VectorXd::Constant(4, 0.5));
  CHECK(code_of([&] { apo_ipw(ds, half, 2.0); }) == ErrorCode::kEmptyDoseGroup);
  const auto tiny = propensity_from_scores(vec({1e-13, 0.5, 0.5, 0.5}));
  CHECK(code_of([&] { apo_ipw(ds, tiny, 1.0); }) == ErrorCode::kZeroPropensity);

  const auto multi = validate(RawColumns{vec({1, 2, 3, 4, 5, 6}), vec({0, 1, 2, 0, 1, 2}), {}, std::nullopt},
                              TreatmentKind::kMultivalued, {0, 1, 2});
  const auto level_two = propensity_from_scores(VectorXd::Constant(6, 0.25), 2.0);
  CHECK(code_of([&] { apo_ipw(multi, propensity_from_scores(VectorXd::Constant(6, 0.25), 5.0), 5.0); }) ==
        ErrorCode::kEmptyDoseGroup);
  CHECK(code_of([&] { ate_ipw(multi, level_two, 1.0, 0.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("multivalued weighting contrast") {
  const auto ds = validate(RawColumns{vec({1, 2, 3, 4, 5, 6}), vec({0, 1, 2, 0, 1, 2}), {}, std::nullopt},
                           TreatmentKind::kMultivalued, {0, 1, 2});
  const VectorXd p = vec({0.2, 0.3, 0.4, 0.25, 0.35, 0.45});
  const auto fit = propensity_from_scores(p, 2.0);
  double oracle = 0.0;
  for (Index i = 0; i < 6; ++i) {
    oracle += ds.d(i) == 2.0 ? ds.y(i) / p(i) : -ds.y(i) / (1.0 - p(i));
  }
  oracle /= 6.0;
  CHECK(ate_ipw(ds, fit, 2.0, 0.0).point == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(apo_ipw(ds, fit, 2.0).point == doctest::Approx((3 / 0.4 + 6 / 0.45) / 6).epsilon(1e-12));
}

TEST_CASE("score regression") {
  const auto ds = four_units();
  const auto flat = propensity_from_scores(VectorXd::Constant(4, 0.3));
  CHECK(ate_psr(ds, flat, 1.0, 0.0).point ==
        doctest::Approx(difference_in_means(ds).point).epsilon(1e-12));
  CHECK(ate_psr(ds, flat, 1.0, 1.0).point == 0.0);
  CHECK(code_of([&] { ate_psr(ds, flat, 1.0, 0.0, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("stratified difference by hand") {
  // Stratum 0: treated 5, control 3 (4 units); stratum 1: treated 9, control 8 (6 units).
  const VectorXd y = vec({5, 5, 3, 3, 9, 9, 9, 8, 8, 8});
  const VectorXd d = vec({1, 1, 0, 0, 1, 1, 1, 0, 0, 0});
  const std::vector<int> stratum{0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  CHECK(stratified_difference(y, d, stratum).point == doctest::Approx(1.4));

  const auto ds = four_units();
  CHECK(ate_stratification(ds, propensity_from_scores(VectorXd::Constant(4, 0.5)), 1).point ==
        doctest::Approx(1.0));

  // A stratum missing an arm is dropped and the rest renormalized.
  const std::vector<int> lopsided{0, 0, 0, 0, 1, 1, 1, 1, 1, 2};
  VectorXd y2 = y;
  VectorXd d2 = d;
  d2(9) = 1;
  const auto e = stratified_difference(y2, d2, lopsided);
  CHECK(e.diagnostics.at("strata_excluded") == 1.0);
  CHECK(e.n_used == 9);
  CHECK(code_of([&] { stratified_difference(y, VectorXd::Ones(10), stratum); }) ==
        ErrorCode::kNoUsableStratum);
}

TEST_CASE("matching by hand") {
  const auto ds = validate(RawColumns{vec({5, 4, 2, 1}), vec({1, 1, 0, 0}), {}, std::nullopt});
  const auto ps = propensity_from_scores(vec({0.6, 0.3, 0.55, 0.25}));
  CHECK(ate_matching(ds, ps, 1).point == doctest::Approx(3.0));
  CHECK(code_of([&] { ate_matching(ds, ps, 3); }) == ErrorCode::kInsufficientMatches);

  const auto ties = validate(RawColumns{vec({2, 2, 2, 2}), vec({1, 0, 1, 0}), {}, std::nullopt});
  CHECK(ate_matching(ties, propensity_from_scores(vec({0.4, 0.4, 0.6, 0.6})), 1).point == 0.0);
}

TEST_CASE("matching breaks distance ties by lowest index") {
  // The treated unit at 0.5 is equidistant from controls at rows 1 and 2.
  const auto ds = validate(RawColumns{vec({10, 1, 3}), vec({1, 0, 0}), {}, std::nullopt});
  const auto ps = propensity_from_scores(vec({0.5, 0.4, 0.6}));
  // Treated imputes y(0)=1 from row 1; controls both match row 0.
  CHECK(ate_matching(ds, ps, 1).point == doctest::Approx(((10 - 1) + (10 - 1) + (10 - 3)) / 3.0));
  CHECK(code_of([&] { ate_matching(ds, ps, 2); }) == ErrorCode::kInsufficientMatches);
}

TEST_CASE("augmented estimator with a constant outcome model equals weighting") {
  const auto ds = four_units();
  const auto half = propensity_from_scores(VectorXd::Constant(4, 0.5));
  // With OR on d only, predictions are arm means and residuals average to zero.
  CHECK(ate_dr(ds, OrSpec{}, half, 1.0, 0.0).point == doctest::Approx(1.0));
  const auto tiny = propensity_from_scores(vec({1e-13, 0.5, 0.5, 0.5}));
  CHECK(code_of([&] { ate_dr(ds, OrSpec{}, tiny, 1.0, 0.0); }) == ErrorCode::kZeroPropensity);
}

TEST_CASE("estimators agree under randomization") {
  const auto ds = randomized_linear(10000, 5, 0.3);
  const auto ps = propensity_from_scores(VectorXd::Constant(ds.n(), 0.3));
  const double or_est = ate_or(ds, using_columns({0}), 1.0, 0.0).point;
  const double ipw_est = ate_ipw(ds, ps, 1.0, 0.0).point;
  const double dr_est = ate_dr(ds, using_columns({0}), ps, 1.0, 0.0).point;
  CHECK(std::abs(or_est - ipw_est) < 0.1);
  CHECK(std::abs(or_est - dr_est) < 0.1);
  CHECK(std::abs(ipw_est - dr_est) < 0.1);
}

TEST_CASE("estimators are invariant to row order") {
  DgpSpec spec;
  spec.n = 400;
  const auto draw = generate(spec, 7);
  const auto& ds = std::get<ObservationalDataset>(draw.data);
  std::vector<Index> perm(static_cast<std::size_t>(ds.n()));
  std::iota(perm.begin(), perm.end(), Index{0});
  Stream s(1);
  std::shuffle(perm.begin(), perm.end(), s);
  const auto shuffled = take_rows(ds, perm);
  const auto ps_a = estimate_propensity_binary(ds);
  const auto ps_b = estimate_propensity_binary(shuffled);
  const auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  CHECK(near(ate_or(ds, using_columns({0}), 1, 0).point,
             ate_or(shuffled, using_columns({0}), 1, 0).point));
  CHECK(near(ate_ipw(ds, ps_a, 1, 0).point, ate_ipw(shuffled, ps_b, 1, 0).point));
  CHECK(near(ate_dr(ds, OrSpec{}, ps_a, 1, 0).point, ate_dr(shuffled, OrSpec{}, ps_b, 1, 0).point));
  CHECK(near(ate_psr(ds, ps_a, 1, 0).point, ate_psr(shuffled, ps_b, 1, 0).point));
  CHECK(near(ate_matching(ds, ps_a).point, ate_matching(shuffled, ps_b).point));
}

TEST_CASE("score methods centre on the case-one effect") {
  MonteCarloOptions o;
  o.case_id = CaseId::kCS1;
  o.methods = {"PSS"};
  o.runs = 1000;
  o.n = 1000;
  CHECK(std::abs(run_monte_carlo(o).rows[0].av_est + 5.0) < 0.25);
}

TEST_CASE("score regression centres on the case-one effect") {
  // With the wide default covariate spread the scores reach 0 and 1, where
  // the outcome is linear in logit(score); a quadratic in the score is then
  // visibly biased, so the degree-2 check uses a narrower spread.
  const auto mean_psr = [](double x_var, int degree) {
    DgpSpec spec;
    spec.params["x_var"] = x_var;
    double sum = 0.0;
    const int runs = 1000;
    for (int r = 0; r < runs; ++r) {
      const auto draw = generate(spec, static_cast<std::uint64_t>(r));
      const auto& ds = std::get<ObservationalDataset>(draw.data);
      sum += ate_psr(ds, estimate_propensity_binary(ds), 1.0, 0.0, degree).point;
    }
    return sum / runs;
  };
  CHECK(std::abs(mean_psr(1.0, 2) + 5.0) < 0.15);
  CHECK(std::abs(mean_psr(10.0, 5) + 5.0) < 0.15);
}
