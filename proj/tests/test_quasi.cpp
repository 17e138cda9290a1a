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
#include <limits>

#include "causalkit/quasi.hpp"
#include "causalkit/rng.hpp"
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

double weighted_loss(const VectorXd& x1, const MatrixXd& x0, const VectorXd& v,
                     const VectorXd& w) {
  const VectorXd r = x1 - x0 * w;
  return r.dot(v.asDiagonal() * r);
}

// Two groups, two periods, `reps` rows per cell with the given cell means.
DidDataset did_cells(double y11, double y10, double y01, double y00, int reps = 1) {
  DidDataset dd;
  dd.y.resize(4 * reps);
  Index r = 0;
  for (int k = 0; k < reps; ++k) {
    const double jitter = reps == 1 ? 0.0 : (k % 2 == 0 ? 0.5 : -0.5);
    for (auto [g, t, m] : {std::tuple{1, 1, y11}, std::tuple{1, 0, y10},
                           std::tuple{0, 1, y01}, std::tuple{0, 0, y00}}) {
      dd.group.push_back(g);
      dd.period.push_back(t);
      dd.y(r++) = m + jitter;
    }
  }
  dd.x = MatrixXd(dd.y.size(), 0);
  return dd;
}

}  // namespace

TEST_CASE("instrument ratio by hand") {
  const auto e = iv_ratio(vec({0, 6}), vec({0, 2}), vec({0, 1}));
  CHECK(e.point == doctest::Approx(3.0));
  CHECK(code_of([] { iv_ratio(vec({1, 2, 3}), vec({0, 1, 2}), vec({1, 1, 1})); }) ==
        ErrorCode::kWeakOrZeroFirstStage);
}

TEST_CASE("instrument ratio with itself as instrument is least squares") {
  Stream s(1);
  const Index n = 50;
  VectorXd y(n), d(n);
  for (Index i = 0; i < n; ++i) {
    d(i) = s.normal();
    y(i) = 1.0 - 0.7 * d(i) + s.normal();
  }
  const auto ols = fit_ols(with_intercept(d), y);
  CHECK(iv_ratio(y, d, d).point == doctest::Approx(ols.coef(1)).epsilon(1e-10));
}

TEST_CASE("two-stage least squares identities") {
  Stream s(2);
  const Index n = 300;
  VectorXd y(n), d(n), z(n);
  MatrixXd x(n, 1);
  for (Index i = 0; i < n; ++i) {
    z(i) = s.normal();
    const double u = s.normal();
    x(i, 0) = s.normal();
    d(i) = 0.8 * z(i) + u + s.normal();
    y(i) = 2.0 - d(i) + 0.3 * x(i, 0) + u + s.normal();
  }
  const MatrixXd ones = MatrixXd::Ones(n, 1);
  const auto just = fit_2sls(y, d, z, ones);
  CHECK(std::abs(just.coef(0) - iv_ratio(y, d, z).point) < 1e-10);
  CHECK(just.first_stage_f > 10.0);

  const auto self = fit_2sls(y, d, d, ones);
  const auto ols = fit_ols(with_intercept(d), y);
  CHECK(std::abs(self.coef(0) - ols.coef(1)) < 1e-10);
  CHECK(std::abs(self.coef(1) - ols.coef(0)) < 1e-10);

  MatrixXd zz(n, 1);
  zz.col(0) = z;
  const auto ds = validate(RawColumns{y, d, x, zz});
  IvSpec spec;
  spec.exogenous_covariates = {0};
  const auto e = ate_2sls(ds, spec);
  CHECK(std::abs(e.point + 1.0) < 0.3);
  REQUIRE(e.variance);
  CHECK(*e.variance > 0.0);

  MatrixXd two_endog(n, 2);
  two_endog << d, x.col(0);
  CHECK(code_of([&] { fit_2sls(y, two_endog, z, ones); }) ==
        ErrorCode::kOrderConditionViolated);
}

TEST_CASE("difference in differences by hand") {
  CHECK(ate_did(did_cells(10, 6, 5, 3)).point == doctest::Approx(2.0));
  CHECK(ate_did(did_cells(10, 6, 5, 3, 4)).point == doctest::Approx(2.0));

  auto shifted = did_cells(10, 6, 5, 3, 4);
  for (Index i = 0; i < shifted.n(); ++i) {
    shifted.y(i) += 11.0 + 3.0 * static_cast<double>(shifted.group[static_cast<std::size_t>(i)]) -
                    2.0 * static_cast<double>(shifted.period[static_cast<std::size_t>(i)]);
  }
  CHECK(ate_did(shifted).point == doctest::Approx(2.0));

  auto missing = did_cells(10, 6, 5, 3);
  missing.group = {1, 1, 1, 1};
  CHECK(code_of([&] { ate_did(missing); }) == ErrorCode::kEmptyCell);
}

TEST_CASE("difference in differences with covariates") {
  auto dd = did_cells(10, 6, 5, 3, 4);
  // The jitter pattern is orthogonal to every cell indicator.
  MatrixXd x(dd.n(), 1);
  for (Index i = 0; i < dd.n(); ++i) x(i, 0) = (i / 4) % 2 == 0 ? 1.0 : -1.0;
  dd.x = x;
  CHECK(std::abs(ate_did_covariates(dd).point - ate_did(dd).point) < 1e-8);

  MatrixXd dup(dd.n(), 1);
  for (Index i = 0; i < dd.n(); ++i) {
    dup(i, 0) = static_cast<double>(dd.group[static_cast<std::size_t>(i)]);
  }
  dd.x = dup;
  CHECK(code_of([&] { ate_did_covariates(dd); }) == ErrorCode::kRankDeficient);
}

TEST_CASE("multiperiod difference in differences") {
  auto dd = did_cells(10, 6, 5, 3, 4);
  VectorXd treated(dd.n());
  for (Index i = 0; i < dd.n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    treated(i) = dd.group[k] == 1 && dd.period[k] == 1 ? 1.0 : 0.0;
  }
  dd.treated = treated;
  CHECK(ate_did_multiperiod(dd).point == doctest::Approx(ate_did(dd).point).epsilon(1e-10));

  // Three groups over four periods; groups 1 and 2 treated from period 2.
  DidDataset panel;
  std::vector<double> ys, tr;
  const double effect = -1.5;
  for (int g = 0; g < 3; ++g) {
    for (int t = 0; t < 4; ++t) {
      for (int k = 0; k < 2; ++k) {
        const bool on = g > 0 && t >= 2;
        panel.group.push_back(g);
        panel.period.push_back(t);
        tr.push_back(on ? 1.0 : 0.0);
        ys.push_back(2.0 * g + 0.7 * t * t + (on ? effect : 0.0));
      }
    }
  }
  panel.y = Eigen::Map<VectorXd>(ys.data(), static_cast<Index>(ys.size()));
  panel.treated = Eigen::Map<VectorXd>(tr.data(), static_cast<Index>(tr.size()));
  panel.x = MatrixXd(panel.y.size(), 0);
  CHECK(ate_did_multiperiod(panel).point == doctest::Approx(effect).epsilon(1e-10));

  // A common shock in period 3 is absorbed by the time dummy.
  for (Index i = 0; i < panel.n(); ++i) {
    if (panel.period[static_cast<std::size_t>(i)] == 3) panel.y(i) += 4.0;
  }
  CHECK(ate_did_multiperiod(panel).point == doctest::Approx(effect).epsilon(1e-10));
}

TEST_CASE("simplex projection") {
  const VectorXd p = project_to_simplex(vec({0.2, 0.9, -0.4}));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p(0) == doctest::Approx(0.15));
  CHECK(p(1) == doctest::Approx(0.85));
  CHECK(p(2) == 0.0);
}

TEST_CASE("synthetic control weights") {
  CHECK(sc_weights(vec({4, 1}), MatrixXd::Constant(2, 1, 2.0), vec({0.5, 0.5}))(0) == 1.0);

  MatrixXd x0(1, 2);
  x0 << 1, 3;
  const VectorXd w = sc_weights(vec({2}), x0, vec({1}));
  CHECK(std::abs(w(0) - 0.5) < 1e-6);
  CHECK(std::abs(w(1) - 0.5) < 1e-6);
  double best = std::numeric_limits<double>::infinity();
  double best_w = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double a = k * 1e-3;
    const double loss = weighted_loss(vec({2}), x0, vec({1}), vec({a, 1 - a}));
    if (loss < best) {
      best = loss;
      best_w = a;
    }
  }
  CHECK(std::abs(w(0) - best_w) <= 1e-3);

  MatrixXd exact(2, 3);
  exact << 1, 5, 5, 2, 7, 7;
  const VectorXd hit = sc_weights(vec({5, 7}), exact, vec({0.3, 0.7}));
  CHECK(hit(1) == 1.0);
  CHECK(hit(0) == 0.0);
  CHECK(hit(2) == 0.0);

  CHECK(code_of([&] { sc_weights(vec({1, 2, 3}), exact, vec({1, 1})); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("synthetic control weights beat a grid and every vertex") {
  Stream s(3);
  for (int rep = 0; rep < 10; ++rep) {
    MatrixXd x0(2, 3);
    for (Index i = 0; i < x0.size(); ++i) x0.data()[i] = s.normal();
    const VectorXd x1 = vec({s.normal(), s.normal()});
    const VectorXd v = vec({0.4, 0.6});
    const VectorXd w = sc_weights(x1, x0, v);
    CHECK(w.minCoeff() >= -1e-10);
    CHECK(std::abs(w.sum() - 1.0) <= 1e-8);
    const double loss = weighted_loss(x1, x0, v, w);
    for (Index j = 0; j < 3; ++j) {
      CHECK(loss <= weighted_loss(x1, x0, v, VectorXd::Unit(3, j)) + 1e-12);
    }
    double grid = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 200; ++a) {
      for (int b = 0; a + b <= 200; ++b) {
        grid = std::min(grid, weighted_loss(x1, x0, v, vec({a / 200.0, b / 200.0,
                                                            (200 - a - b) / 200.0})));
      }
    }
    CHECK(loss <= grid + 1e-12);
  }
}

TEST_CASE("synthetic control fit") {
  // Donor 2 reproduces the treated unit before treatment.
  ScProblem perfect;
  perfect.x1 = vec({1.0, 2.0});
  perfect.x0.resize(2, 3);
  perfect.x0 << 0.0, 1.0, 3.0, 5.0, 2.0, 1.0;
  perfect.z1 = vec({1, 2, 3});
  perfect.z0.resize(3, 3);
  perfect.z0 << 4, 1, 0, 5, 2, 0, 9, 3, 1;
  perfect.y1 = vec({10, 11});
  perfect.y0.resize(2, 3);
  perfect.y0 << 1, 4, 2, 1, 6, 2;
  const auto fit = sc_fit(perfect);
  CHECK(std::abs(fit.weights(1) - 1.0) < 1e-6);
  CHECK(std::abs(fit.gap(0) - 6.0) < 1e-5);
  CHECK(std::abs(fit.gap(1) - 5.0) < 1e-5);
  CHECK(fit.estimate.point == doctest::Approx(fit.gap.mean()));
  CHECK(std::abs(fit.v.sum() - 1.0) < 1e-12);

  ScProblem same = perfect;
  same.x0.col(0) = same.x0.col(1);
  same.x0.col(2) = same.x0.col(1);
  same.z0.col(0) = same.z0.col(1);
  same.z0.col(2) = same.z0.col(1);
  CHECK(code_of([&] { sc_fit(same); }) == ErrorCode::kDegenerateProblem);
}

TEST_CASE("synthetic control recovers a convex combination") {
  Stream s(4);
  const Index k = 4, j = 4, pre = 6;
  ScProblem p;
  p.x0.resize(k, j);
  p.z0.resize(pre, j);
  p.y0.resize(2, j);
  for (Index i = 0; i < p.x0.size(); ++i) p.x0.data()[i] = s.normal();
  for (Index i = 0; i < p.z0.size(); ++i) p.z0.data()[i] = s.normal();
  for (Index i = 0; i < p.y0.size(); ++i) p.y0.data()[i] = s.normal();
  const VectorXd truth = vec({0.3, 0.0, 0.7, 0.0});
  p.x1 = p.x0 * truth;
  p.z1 = p.z0 * truth;
  p.y1 = p.y0 * truth;
  const auto fit = sc_fit(p);
  CHECK((fit.weights - truth).cwiseAbs().maxCoeff() < 1e-3);
  CHECK(fit.gap.cwiseAbs().maxCoeff() < 1e-2);

  // Relabelling donors permutes the weights.
  const std::vector<Index> order{3, 1, 0, 2};
  ScProblem q = p;
  for (Index c = 0; c < j; ++c) {
    q.x0.col(c) = p.x0.col(order[static_cast<std::size_t>(c)]);
    q.z0.col(c) = p.z0.col(order[static_cast<std::size_t>(c)]);
    q.y0.col(c) = p.y0.col(order[static_cast<std::size_t>(c)]);
  }
  const auto refit = sc_fit(q);
  for (Index c = 0; c < j; ++c) {
    CHECK(std::abs(refit.weights(c) - fit.weights(order[static_cast<std::size_t>(c)])) < 1e-3);
  }
  CHECK(std::abs(refit.estimate.point - fit.estimate.point) < 1e-2);
}

TEST_CASE("sharp discontinuity") {
  const Index n = 201;
  VectorXd t(n), y(n);
  for (Index i = 0; i < n; ++i) {
    t(i) = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    y(i) = 1.0 + 2.0 * t(i) + (t(i) >= 0.0 ? 5.0 : 0.0);
  }
  const auto e = rdd_sharp(y, t, 0.0);
  CHECK(std::abs(e.point - 5.0) < 1e-9);
  CHECK(e.diagnostics.at("n_left") + e.diagnostics.at("n_right") == n);
  RddSpec narrow;
  narrow.bandwidth = 0.3;
  CHECK(std::abs(rdd_sharp(y, t, 0.0, narrow).point - 5.0) < 1e-9);
  CHECK(rdd_sharp(y, t, 0.0, narrow).n_used < n);

  CHECK(code_of([&] { rdd_sharp(y, t, 2.0); }) == ErrorCode::kOneSidedData);
}

TEST_CASE("fuzzy discontinuity") {
  Stream s(5);
  const Index n = 500;
  VectorXd t(n), y(n), d(n), alternating(n);
  for (Index i = 0; i < n; ++i) {
    t(i) = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    d(i) = t(i) >= 0.0 ? 1.0 : 0.0;
    alternating(i) = static_cast<double>(i % 2);
    y(i) = 1.0 + 2.0 * t(i) + 5.0 * d(i) + s.normal();
  }
  CHECK(std::abs(rdd_fuzzy(y, t, d, 0.0).point - rdd_sharp(y, t, 0.0).point) < 1e-8);
  CHECK(code_of([&] { rdd_fuzzy(y, t, alternating, 0.0); }) == ErrorCode::kNoFirstStageJump);
}
