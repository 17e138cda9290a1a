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

#ifndef CAUSALKIT_REGRESS_HPP_
#define CAUSALKIT_REGRESS_HPP_

#include <Eigen/Dense>

#include "causalkit/core.hpp"

namespace causalkit {

enum class Link { kIdentity, kLogit };

struct LinearFit {
  VectorXd coef;
  Link link = Link::kIdentity;
  // y - Xb for identity; d - p for logit (response residuals).
  VectorXd residuals;
  // Estimated covariance of coef; sigma2 (X'WX)^-1 for identity,
  // inverse Fisher information for logit. Empty when df <= 0.
  MatrixXd coef_cov;
  Index design_width = 0;
  bool converged = true;
  int iterations = 0;
  double sigma2 = 0.0;  // residual variance RSS/(n-k); identity only
  Index n = 0;
};

struct LogisticOptions {
  int max_iter = 100;
  double tol = 1e-8;
};

// Smallest/largest singular value ratio below which a design is rejected.
inline constexpr double kRankTolerance = 1e-10;

LinearFit fit_ols(const MatrixXd& design, const VectorXd& y);
LinearFit fit_ols(const MatrixXd& design, const VectorXd& y,
                  const VectorXd& weights);

// Newton/IRLS maximum likelihood for P(d=1|x) = expit(x'b), starting at 0.
LinearFit fit_logistic(const MatrixXd& design, const VectorXd& d,
                       const LogisticOptions& options = {});

VectorXd predict(const LinearFit& fit, const MatrixXd& design_new);

double expit(double t);
double logistic_log_likelihood(const MatrixXd& design, const VectorXd& d,
                               const VectorXd& coef);
VectorXd logistic_score(const MatrixXd& design, const VectorXd& d,
                        const VectorXd& coef);

// `x` with a leading column of ones.
MatrixXd with_intercept(const MatrixXd& x);

}  // namespace causalkit

#endif  // CAUSALKIT_REGRESS_HPP_
