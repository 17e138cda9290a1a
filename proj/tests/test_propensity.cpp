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

#include <cmath>
#include <numbers>

#include "causalkit/propensity.hpp"
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

ObservationalDataset randomized(Index n, std::uint64_t seed) {
  Stream s(seed);
  VectorXd y(n), d(n);
  MatrixXd x(n, 2);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = s.normal();
    x(i, 1) = s.uniform(0, 3);
    d(i) = s.bernoulli(0.5) ? 1.0 : 0.0;
    y(i) = s.normal();
  }
  return validate(RawColumns{y, d, x, std::nullopt});
}

ObservationalDataset case_one(Index n, std::uint64_t run) {
  DgpSpec spec;
  spec.case_id = CaseId::kCS1;
  spec.n = n;
  return std::get<ObservationalDataset>(generate(spec, run).data);
}

}  // namespace

TEST_CASE("randomized assignment gives flat scores") {
  const auto ds = randomized(10000, 3);
  const auto fit = estimate_propensity_binary(ds);
  CHECK(std::abs(fit.scores.mean() - 0.5) < 0.02);
  CHECK(fit.scores.minCoeff() > 0.0);
  CHECK(fit.scores.maxCoeff() < 1.0);
}

TEST_CASE("case-one assignment coefficients are recovered") {
  const auto fit = estimate_propensity_binary(case_one(10000, 0));
  CHECK(std::abs(fit.model.coef(0) - 2.0) < 0.1);
  CHECK(std::abs(fit.model.coef(1) - 0.5) < 0.1);
}

TEST_CASE("degenerate treatment") {
  VectorXd y = VectorXd::Ones(4), d = VectorXd::Ones(4);
  MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  const auto ds = validate(RawColumns{y, d, x, std::nullopt});
  CHECK(code_of([&] { estimate_propensity_binary(ds); }) == ErrorCode::kNoVariationInD);
}

TEST_CASE("scores invariant to affine covariate rescaling") {
  auto ds = case_one(2000, 1);
  const auto a = estimate_propensity_binary(ds);
  ds.x.col(0) = 3.0 * ds.x.col(0).array() - 7.0;
  const auto b = estimate_propensity_binary(ds);
  CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("generalized propensity score") {
  Stream s(4);
  const Index n = 5000;
  VectorXd x(n), d(n), y(n);
  for (Index i = 0; i < n; ++i) {
    x(i) = s.normal();
    d(i) = 1.0 + 0.5 * x(i) + s.normal();
    y(i) = s.normal();
  }
  const auto fit = estimate_gps_normal(validate(RawColumns{y, d, x, std::nullopt}));
  CHECK(std::abs(fit.sigma - 1.0) < 0.05);
  // Density at the fitted mean is the normal mode.
  const double mode = 1.0 / (fit.sigma * std::sqrt(2.0 * std::numbers::pi));
  CHECK(fit.scores.maxCoeff() <= mode);
  CHECK(fit.scores.maxCoeff() > 0.99 * mode);

  VectorXd exact = (2.0 + x.array()).matrix();
  CHECK(code_of([&] { estimate_gps_normal(validate(RawColumns{y, exact, x, std::nullopt})); }) ==
        ErrorCode::kSigmaFloor);
}

TEST_CASE("density at the mode") {
  VectorXd x(4), d(4), y = VectorXd::Zero(4);
  x << 0, 0, 1, 1;
  d << -1, 1, 0, 2;  // residuals +-1 around fitted means 0 and 1
  const auto fit = estimate_gps_normal(validate(RawColumns{y, d, x, std::nullopt}));
  const double sigma = std::sqrt(4.0 / 2.0);
  CHECK(fit.sigma == doctest::Approx(sigma));
  CHECK(fit.scores(0) == doctest::Approx(std::exp(-0.5 / 2.0) /
                                         (sigma * std::sqrt(2 * std::numbers::pi))));
}

TEST_CASE("trimming") {
  VectorXd s(3);
  s << 0.001, 0.5, 0.999;
  const auto [fit, kept] = trim_overlap(propensity_from_scores(s));
  CHECK(kept == std::vector<Index>{1});
  CHECK(fit.scores.size() == 1);
  CHECK(fit.dropped == 2);

  const auto [same, all] = trim_overlap(propensity_from_scores(s), 0.0, 1.0);
  CHECK(all.size() == 3);
  CHECK(same.scores == s);

  VectorXd low(2);
  low << 0.001, 0.002;
  CHECK(code_of([&] { trim_overlap(propensity_from_scores(low)); }) ==
        ErrorCode::kAllUnitsTrimmed);
}

TEST_CASE("propensity at a dose") {
  VectorXd s(2);
  s << 0.2, 0.7;
  const auto fit = propensity_from_scores(s);
  CHECK(propensity_at(fit, 0, 1.0) == doctest::Approx(0.2));
  CHECK(propensity_at(fit, 1, 0.0) == doctest::Approx(0.3));
  CHECK(code_of([&] { propensity_at(fit, 0, 2.0); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { propensity_from_scores(VectorXd::Ones(2)); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("quantile strata with stable ties") {
  VectorXd s(6);
  s << 0.3, 0.1, 0.3, 0.9, 0.3, 0.2;
  const auto strata = stratify_by_score(s, 3);
  // Sorted order: 1, 5, 0, 2, 4, 3.
  CHECK(strata == std::vector<int>{1, 0, 1, 2, 2, 0});
}

TEST_CASE("balance under randomization") {
  const auto ds = randomized(10000, 9);
  const auto table = balance_diagnostic(ds, estimate_propensity_binary(ds), 5);
  REQUIRE(table.covariates.size() == 2);
  for (const auto& c : table.covariates) {
    CHECK(c.overall_smd < 0.1);
    CHECK(c.stratified_smd < 0.1);
  }
}

TEST_CASE("balancing property on the case-one design") {
  const auto ds = case_one(10000, 2);
  const auto table = balance_diagnostic(ds, estimate_propensity_binary(ds), 5);
  CHECK(table.covariates[0].overall_smd > 0.5);
  CHECK(table.covariates[0].stratified_smd < 0.2);

  int shrunk = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto rep = case_one(10000, 100 + r);
    const auto b = balance_diagnostic(rep, estimate_propensity_binary(rep), 5);
    shrunk += b.covariates[0].stratified_smd < b.covariates[0].overall_smd;
  }
  CHECK(shrunk >= 19);
}

TEST_CASE("constant covariate has zero imbalance") {
  auto ds = randomized(200, 10);
  ds.x.col(1).setConstant(4.0);
  const auto table = balance_diagnostic(ds, propensity_from_scores(VectorXd::Constant(200, 0.5)), 2);
  CHECK(table.covariates[1].overall_smd == 0.0);
  CHECK(table.covariates[1].stratified_smd == 0.0);
}
