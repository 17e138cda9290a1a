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

#include "causalkit/regress.hpp"

#include <cmath>

namespace causalkit {

namespace {

// Pinned-probability threshold and coefficient magnitude that together
// signal (quasi-)complete separation.
constexpr double kPinnedProbability = 1e-10;
constexpr double kDivergentCoefficient = 30.0;
constexpr double kPerfectFit = 1e-4;

void check_shapes(const MatrixXd& design, Index n_response) {
  if (design.rows() != n_response) {
    throw Error(ErrorCode::kDimensionMismatch,
                "design has " + std::to_string(design.rows()) +
                    " rows, response has " + std::to_string(n_response));
  }
  if (design.cols() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "design has no columns");
  }
  if (design.rows() < design.cols()) {
    throw Error(ErrorCode::kRankDeficient,
                "fewer rows (" + std::to_string(design.rows()) +
                    ") than columns (" + std::to_string(design.cols()) + ")");
  }
}

// Solves the least-squares problem min |Aw - b| through a Householder QR of
// A; the singular values of R equal those of A and drive the rank check.
struct QrSolve {
  VectorXd coef;
  MatrixXd r_inv;  // R^-1, so (A'A)^-1 = R^-1 R^-T
};

QrSolve qr_least_squares(const MatrixXd& a, const VectorXd& b) {
  Eigen::HouseholderQR<MatrixXd> qr(a);
  const Index k = a.cols();
  const MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(r).singularValues();
  if (!(sv(0) > 0.0) || sv(k - 1) / sv(0) < kRankTolerance) {
    throw Error(ErrorCode::kRankDeficient,
                "design is collinear (singular value ratio " +
                    std::to_string(sv(0) > 0.0 ? sv(k - 1) / sv(0) : 0.0) + ")");
  }
  const VectorXd qtb = (qr.householderQ().transpose() * b).head(k);
  QrSolve out;
  out.coef = r.triangularView<Eigen::Upper>().solve(qtb);
  out.r_inv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
  return out;
}

}  // namespace

double expit(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

MatrixXd with_intercept(const MatrixXd& x) {
  MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

LinearFit fit_ols(const MatrixXd& design, const VectorXd& y) {
  check_shapes(design, y.size());
  const Index n = design.rows(), k = design.cols();
  const QrSolve s = qr_least_squares(design, y);
  LinearFit fit;
  fit.coef = s.coef;
  fit.residuals = y - design * s.coef;
  fit.design_width = k;
  fit.n = n;
  fit.iterations = 1;
  if (n > k) {
    fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - k);
    fit.coef_cov = fit.sigma2 * s.r_inv * s.r_inv.transpose();
  } else {
    fit.sigma2 = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

LinearFit fit_ols(const MatrixXd& design, const VectorXd& y,
                  const VectorXd& weights) {
  check_shapes(design, y.size());
  if (weights.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights length differs from y");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "weights must be finite and non-negative");
  }
  const Index n = design.rows(), k = design.cols();
  const VectorXd sw = weights.cwiseSqrt();
  const QrSolve s = qr_least_squares(sw.asDiagonal() * design, sw.cwiseProduct(y));
  LinearFit fit;
  fit.coef = s.coef;
  fit.residuals = y - design * s.coef;
  fit.design_width = k;
  fit.n = n;
  fit.iterations = 1;
  const Index n_pos = (weights.array() > 0.0).count();
  if (n_pos > k) {
    fit.sigma2 = (sw.cwiseProduct(fit.residuals)).squaredNorm() /
                 static_cast<double>(n_pos - k);
    fit.coef_cov = fit.sigma2 * s.r_inv * s.r_inv.transpose();
  } else {
    fit.sigma2 = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

double logistic_log_likelihood(const MatrixXd& design, const VectorXd& d,
                               const VectorXd& coef) {
  const VectorXd eta = design * coef;
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    // log(1 + e^t) computed without overflow.
    const double t = eta(i);
    const double softplus = t > 0.0 ? t + std::log1p(std::exp(-t))
                                    : std::log1p(std::exp(t));
    ll += d(i) * t - softplus;
  }
  return ll;
}

VectorXd logistic_score(const MatrixXd& design, const VectorXd& d,
                        const VectorXd& coef) {
  const VectorXd eta = design * coef;
  VectorXd resid(eta.size());
  for (Index i = 0; i < eta.size(); ++i) resid(i) = d(i) - expit(eta(i));
  return design.transpose() * resid;
}

LinearFit fit_logistic(const MatrixXd& design, const VectorXd& d,
                       const LogisticOptions& options) {
  check_shapes(design, d.size());
  if (!is_binary_coded(d)) {
    throw Error(ErrorCode::kInvalidArgument, "logistic response must be 0/1");
  }
  const double n1 = d.sum();
  if (n1 == 0.0 || n1 == static_cast<double>(d.size())) {
    throw Error(ErrorCode::kNoVariationInD, "response has a single class");
  }
  const Index n = design.rows(), k = design.cols();

  LinearFit fit;
  fit.link = Link::kLogit;
  fit.design_width = k;
  fit.n = n;
  fit.coef = VectorXd::Zero(k);
  fit.converged = false;

  VectorXd p(n), w(n);
  double ll = logistic_log_likelihood(design, d, fit.coef);
  const auto separated = [&] {
    const bool pinned = ((p.array() < kPinnedProbability) ||
                         (p.array() > 1.0 - kPinnedProbability)).any();
    // Every unit classified with near certainty only happens on separated data.
    const bool perfect = (d - p).cwiseAbs().maxCoeff() < kPerfectFit;
    return perfect || (pinned && fit.coef.cwiseAbs().maxCoeff() > kDivergentCoefficient);
  };

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const VectorXd eta = design * fit.coef;
    for (Index i = 0; i < n; ++i) {
      p(i) = expit(eta(i));
      w(i) = p(i) * (1.0 - p(i));
    }
    const VectorXd score = design.transpose() * (d - p);
    fit.iterations = iter;
    if (separated()) {
      throw Error(ErrorCode::kSeparationDetected,
                  "fitted probabilities pinned at 0/1 with diverging coefficients");
    }
    if (score.cwiseAbs().maxCoeff() < options.tol) {
      fit.converged = true;
      break;
    }
    if (iter == options.max_iter) break;

    // Newton step from the weighted least-squares subproblem.
    const VectorXd sw = w.cwiseSqrt();
    VectorXd step;
    try {
      const QrSolve s = qr_least_squares(sw.asDiagonal() * design,
                                         (d - p).cwiseQuotient(sw.cwiseMax(1e-300)));
      step = s.coef;
    } catch (const Error&) {
      throw Error(ErrorCode::kSeparationDetected,
                  "information matrix singular; fitted probabilities degenerate");
    }
    // Step halving keeps the likelihood monotone.
    double scale = 1.0;
    VectorXd trial = fit.coef + step;
    double ll_trial = logistic_log_likelihood(design, d, trial);
    for (int h = 0; h < 30 && !(ll_trial >= ll - 1e-12 * std::abs(ll)); ++h) {
      scale *= 0.5;
      trial = fit.coef + scale * step;
      ll_trial = logistic_log_likelihood(design, d, trial);
    }
    fit.coef = trial;
    ll = ll_trial;
  }
  if (!fit.converged) {
    for (Index i = 0; i < n; ++i) p(i) = expit(design.row(i).dot(fit.coef));
    if (separated()) {
      throw Error(ErrorCode::kSeparationDetected,
                  "fitted probabilities pinned at 0/1 with diverging coefficients");
    }
    throw Error(ErrorCode::kNotConverged,
                "IRLS did not reach score tolerance in " +
                    std::to_string(options.max_iter) + " iterations");
  }
  fit.residuals = d - p;
  const MatrixXd info = design.transpose() * w.asDiagonal() * design;
  fit.coef_cov = info.ldlt().solve(MatrixXd::Identity(k, k));
  fit.sigma2 = 1.0;
  return fit;
}

VectorXd predict(const LinearFit& fit, const MatrixXd& design_new) {
  if (design_new.cols() != fit.design_width) {
    throw Error(ErrorCode::kDimensionMismatch,
                "design has " + std::to_string(design_new.cols()) +
                    " columns, fit expects " + std::to_string(fit.design_width));
  }
  VectorXd eta = design_new * fit.coef;
  if (fit.link == Link::kLogit) {
    for (Index i = 0; i < eta.size(); ++i) eta(i) = expit(eta(i));
  }
  return eta;
}

}  // namespace causalkit
