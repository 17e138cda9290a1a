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

#ifndef CAUSALKIT_VARIANCE_HPP_
#define CAUSALKIT_VARIANCE_HPP_

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "causalkit/core.hpp"
#include "causalkit/regress.hpp"

namespace causalkit {

// An arm-specific outcome model m_a(x; b_a) and its design evaluated at
// every unit of the sample (so predictions average over the full sample).
struct ArmModel {
  LinearFit fit;
  MatrixXd design;
};

// Fits y on (1, x_S) separately in the treated and control arms of a
// binary-treatment dataset. Returns {treated, control}.
std::pair<ArmModel, ArmModel> fit_arm_models(const ObservationalDataset& ds,
                                             const std::vector<Index>& covariates);

// (1/N) sum_i [m_1(x_i) - m_0(x_i)].
double arm_contrast(const ArmModel& m1, const ArmModel& m0);

// Gradient of (1/N) sum_i m(x_i; b) with respect to b.
VectorXd mean_prediction_gradient(const LinearFit& fit, const MatrixXd& design);

// Delta-method variance of the arm-model contrast:
//   { mean_i (c_i - c_bar)^2 + g_0 V_0 g_0' + g_1 V_1 g_1' } / N
// with V_a the asymptotic covariance of sqrt(N)(b_a - beta_a), i.e. N times
// the fitted coefficient covariance, and g_a the mean prediction gradient.
double delta_variance_or(const ArmModel& m1, const ArmModel& m0);

// Same construction for a single pooled model evaluated at two doses:
// the contrast gradient is mean_i (row_i(dose) - row_i(reference)).
double delta_variance_contrast(const LinearFit& model, const MatrixXd& design_dose,
                               const MatrixXd& design_reference);

struct BootstrapResult {
  double variance = 0.0;  // divisor B_ok - 1
  std::pair<double, double> ci{0.0, 0.0};  // 2.5% and 97.5% percentiles
  std::vector<double> replicates;          // NaN marks a failed replicate
  int failed = 0;
};

using DatasetStatistic = std::function<double(const ObservationalDataset&)>;
using PanelStatistic = std::function<double(const PanelDataset&)>;

// Nonparametric bootstrap over rows. Replicate b draws its indices from
// Stream::derive({seed, b}), so results do not depend on `jobs`. Replicates
// whose statistic throws are dropped; 10% or more failures is an error.
// jobs <= 0 uses the OpenMP default thread count.
BootstrapResult bootstrap_variance(const DatasetStatistic& statistic,
                                   const ObservationalDataset& ds, int replicates,
                                   std::uint64_t seed, int jobs = 0);

// Single-threaded reference with identical results.
BootstrapResult bootstrap_variance_serial(const DatasetStatistic& statistic,
                                          const ObservationalDataset& ds,
                                          int replicates, std::uint64_t seed);

// Panel version: resamples whole units.
BootstrapResult bootstrap_variance_panel(const PanelStatistic& statistic,
                                         const PanelDataset& pds, int replicates,
                                         std::uint64_t seed, int jobs = 0);

// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double prob);

}  // namespace causalkit

#endif  // CAUSALKIT_VARIANCE_HPP_
