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

#include "causalkit/variance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <omp.h>

#include "causalkit/rng.hpp"

namespace causalkit {

namespace {

constexpr double kMaxFailedShare = 0.10;

void require_covariance(const LinearFit& fit) {
  if (fit.coef_cov.rows() != fit.coef.size() || fit.coef.size() == 0) {
    throw Error(ErrorCode::kMissingCoefCovariance,
                "outcome model carries no coefficient covariance");
  }
}

std::vector<Index> draw_indices(std::uint64_t seed, int b, Index n) {
  Stream s = Stream::derive({seed, static_cast<std::uint64_t>(b)});
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = static_cast<Index>(s.below(static_cast<std::uint64_t>(n)));
  return idx;
}

BootstrapResult summarize(std::vector<double> reps) {
  BootstrapResult out;
  std::vector<double> ok;
  ok.reserve(reps.size());
  for (double r : reps) {
    if (std::isfinite(r)) ok.push_back(r);
  }
  out.failed = static_cast<int>(reps.size() - ok.size());
  if (static_cast<double>(out.failed) >= kMaxFailedShare * static_cast<double>(reps.size())) {
    throw Error(ErrorCode::kTooManyFailedReplicates,
                std::to_string(out.failed) + " of " + std::to_string(reps.size()) +
                    " bootstrap replicates failed");
  }
  if (ok.size() < 2) {
    throw Error(ErrorCode::kTooManyFailedReplicates,
                "fewer than two successful replicates");
  }
  double mean = 0.0;
  for (double r : ok) mean += r;
  mean /= static_cast<double>(ok.size());
  double ss = 0.0;
  for (double r : ok) ss += (r - mean) * (r - mean);
  out.variance = ss / static_cast<double>(ok.size() - 1);
  std::sort(ok.begin(), ok.end());
  out.ci = {quantile_sorted(ok, 0.025), quantile_sorted(ok, 0.975)};
  out.replicates = std::move(reps);
  return out;
}

template <typename Data, typename Statistic, typename Resample>
BootstrapResult run_bootstrap(const Statistic& statistic, const Data& data,
                              Index n_draw, int replicates, std::uint64_t seed,
                              int jobs, bool parallel, const Resample& resample) {
  if (replicates < 2) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap needs B >= 2 replicates");
  }
  // Precondition: the statistic works on the original sample. Errors escape.
  (void)statistic(data);

  std::vector<double> reps(static_cast<std::size_t>(replicates),
                           std::numeric_limits<double>::quiet_NaN());
  const auto one = [&](int b) {
    try {
      const double v = statistic(resample(draw_indices(seed, b, n_draw)));
      reps[static_cast<std::size_t>(b)] =
          std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN();
    } catch (const std::exception&) {
      // counted as failed
    }
  };
  if (parallel) {
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int b = 0; b < replicates; ++b) one(b);
  } else {
    for (int b = 0; b < replicates; ++b) one(b);
  }
  return summarize(std::move(reps));
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<ArmModel, ArmModel> fit_arm_models(const ObservationalDataset& ds,
                                             const std::vector<Index>& covariates) {
  require_binary(ds, "fit_arm_models");
  MatrixXd xs(ds.n(), static_cast<Index>(covariates.size()));
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    if (covariates[j] < 0 || covariates[j] >= ds.p()) {
      throw Error(ErrorCode::kInvalidArgument, "covariate index out of range");
    }
    xs.col(static_cast<Index>(j)) = ds.x.col(covariates[j]);
  }
  const MatrixXd design = with_intercept(xs);
  std::vector<Index> treated, control;
  for (Index i = 0; i < ds.n(); ++i) (ds.d(i) == 1.0 ? treated : control).push_back(i);
  if (treated.empty() || control.empty()) {
    throw Error(ErrorCode::kEmptyTreatmentArm, "both arms are needed for arm models");
  }
  const auto arm = [&](const std::vector<Index>& rows) {
    MatrixXd x(static_cast<Index>(rows.size()), design.cols());
    VectorXd y(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Index>(r)) = design.row(rows[r]);
      y(static_cast<Index>(r)) = ds.y(rows[r]);
    }
    return ArmModel{fit_ols(x, y), design};
  };
  return {arm(treated), arm(control)};
}

double arm_contrast(const ArmModel& m1, const ArmModel& m0) {
  return (predict(m1.fit, m1.design) - predict(m0.fit, m0.design)).mean();
}

VectorXd mean_prediction_gradient(const LinearFit& fit, const MatrixXd& design) {
  if (design.cols() != fit.design_width) {
    throw Error(ErrorCode::kDimensionMismatch, "design width differs from fit");
  }
  if (fit.link == Link::kIdentity) return design.colwise().mean().transpose();
  const VectorXd p = predict(fit, design);
  const VectorXd w = p.cwiseProduct((1.0 - p.array()).matrix());
  return (design.transpose() * w) / static_cast<double>(design.rows());
}

double delta_variance_or(const ArmModel& m1, const ArmModel& m0) {
  require_covariance(m1.fit);
  require_covariance(m0.fit);
  if (m1.design.rows() != m0.design.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "arm designs cover different samples");
  }
  const double n = static_cast<double>(m1.design.rows());
  const VectorXd c = predict(m1.fit, m1.design) - predict(m0.fit, m0.design);
  const double spread = (c.array() - c.mean()).square().mean();
  const VectorXd g1 = mean_prediction_gradient(m1.fit, m1.design);
  const VectorXd g0 = mean_prediction_gradient(m0.fit, m0.design);
  // g (N Cov) g' / N == g Cov g'.
  return spread / n + g0.dot(m0.fit.coef_cov * g0) + g1.dot(m1.fit.coef_cov * g1);
}

double delta_variance_contrast(const LinearFit& model, const MatrixXd& design_dose,
                               const MatrixXd& design_reference) {
  require_covariance(model);
  const double n = static_cast<double>(design_dose.rows());
  const VectorXd c = predict(model, design_dose) - predict(model, design_reference);
  const double spread = (c.array() - c.mean()).square().mean();
  const VectorXd g = mean_prediction_gradient(model, design_dose) -
                     mean_prediction_gradient(model, design_reference);
  return spread / n + g.dot(model.coef_cov * g);
}

BootstrapResult bootstrap_variance(const DatasetStatistic& statistic,
                                   const ObservationalDataset& ds, int replicates,
                                   std::uint64_t seed, int jobs) {
  return run_bootstrap(statistic, ds, ds.n(), replicates, seed, jobs, true,
                       [&](const std::vector<Index>& idx) { return take_rows(ds, idx); });
}

BootstrapResult bootstrap_variance_serial(const DatasetStatistic& statistic,
                                          const ObservationalDataset& ds,
                                          int replicates, std::uint64_t seed) {
  return run_bootstrap(statistic, ds, ds.n(), replicates, seed, 1, false,
                       [&](const std::vector<Index>& idx) { return take_rows(ds, idx); });
}

BootstrapResult bootstrap_variance_panel(const PanelStatistic& statistic,
                                         const PanelDataset& pds, int replicates,
                                         std::uint64_t seed, int jobs) {
  return run_bootstrap(statistic, pds, pds.n_units(), replicates, seed, jobs, true,
                       [&](const std::vector<Index>& idx) { return take_units(pds, idx); });
}

}  // namespace causalkit
