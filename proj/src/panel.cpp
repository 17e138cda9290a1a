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

#include "causalkit/panel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalkit/regress.hpp"

namespace causalkit {

namespace {

// Relative size below which a transformed regressor counts as constant.
constexpr double kVariationTolerance = 1e-12;

struct Regressors {
  VectorXd d;
  MatrixXd x;
};

Regressors select(const PanelDataset& pds, const PanelSpec& spec) {
  Regressors r{pds.d, {}};
  if (!spec.covariates) {
    r.x = pds.x;
    return r;
  }
  r.x.resize(pds.n(), static_cast<Index>(spec.covariates->size()));
  for (std::size_t j = 0; j < spec.covariates->size(); ++j) {
    const Index c = (*spec.covariates)[j];
    if (c < 0 || c >= pds.x.cols()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "covariate index " + std::to_string(c) + " out of range");
    }
    r.x.col(static_cast<Index>(j)) = pds.x.col(c);
  }
  return r;
}

// Per-row unit means of each column of m.
MatrixXd unit_means(const PanelDataset& pds, const MatrixXd& m) {
  MatrixXd out(m.rows(), m.cols());
  for (const auto& rows : pds.groups) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(m.cols());
    for (Index r : rows) mean += m.row(r);
    mean /= static_cast<double>(rows.size());
    for (Index r : rows) out.row(r) = mean;
  }
  return out;
}

bool nearly_constant(const VectorXd& v, double scale) {
  if (v.size() == 0) return true;
  return v.maxCoeff() - v.minCoeff() <= kVariationTolerance * std::max(1.0, scale);
}

void require_periods(const PanelDataset& pds, PanelMethod method) {
  for (std::size_t u = 0; u < pds.groups.size(); ++u) {
    if (pds.groups[u].size() < 2) {
      throw Error(ErrorCode::kTooFewPeriods,
                  std::string(panel_method_name(method)) + " needs at least two "
                  "periods per unit; unit " + std::to_string(pds.unit[static_cast<std::size_t>(
                      pds.groups[u].front())]) + " has one");
    }
  }
}

MatrixXd stack(const VectorXd& d, const MatrixXd& x, bool intercept) {
  const Index off = intercept ? 1 : 0;
  MatrixXd m(d.size(), off + 1 + x.cols());
  if (intercept) m.col(0).setOnes();
  m.col(off) = d;
  m.rightCols(x.cols()) = x;
  return m;
}

CausalEstimate from_fit(const LinearFit& fit, Index d_col, PanelMethod method,
                        Index n_used, double cov_scale = 1.0) {
  CausalEstimate e;
  e.method = std::string(panel_method_name(method));
  e.point = fit.coef(d_col);
  e.n_used = n_used;
  if (fit.coef_cov.size() > 0) e.set_variance(cov_scale * fit.coef_cov(d_col, d_col));
  return e;
}

CausalEstimate pooled(const Regressors& r, const VectorXd& y, bool intercept,
                      PanelMethod method) {
  const LinearFit fit = fit_ols(stack(r.d, r.x, intercept), y);
  return from_fit(fit, intercept ? 1 : 0, method, y.size());
}

CausalEstimate fixed_effects(const PanelDataset& pds, const Regressors& r) {
  require_periods(pds, PanelMethod::kFE);
  const VectorXd dd = r.d - unit_means(pds, r.d);
  if (dd.cwiseAbs().maxCoeff() <=
      kVariationTolerance * std::max(1.0, r.d.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kNoWithinVariation, "treatment is constant within every unit");
  }
  const MatrixXd xx = r.x - unit_means(pds, r.x);
  const VectorXd yy = pds.y - unit_means(pds, pds.y);
  const LinearFit fit = fit_ols(stack(dd, xx, false), yy);
  // The demeaned regression does not see the N estimated unit means.
  const Index k = 1 + xx.cols();
  const Index df = pds.n() - pds.n_units() - k;
  CausalEstimate e = from_fit(fit, 0, PanelMethod::kFE, pds.n(),
                              df > 0 ? static_cast<double>(pds.n() - k) / df
                                     : std::numeric_limits<double>::quiet_NaN());
  e.diagnostics["df_resid"] = static_cast<double>(df);
  return e;
}

CausalEstimate first_difference(const PanelDataset& pds, const Regressors& r,
                                bool intercept) {
  require_periods(pds, PanelMethod::kFD);
  const Index rows = pds.n() - pds.n_units();
  VectorXd dy(rows), dd(rows);
  MatrixXd dx(rows, r.x.cols());
  Index k = 0;
  for (const auto& g : pds.groups) {
    for (std::size_t s = 1; s < g.size(); ++s, ++k) {
      dy(k) = pds.y(g[s]) - pds.y(g[s - 1]);
      dd(k) = r.d(g[s]) - r.d(g[s - 1]);
      dx.row(k) = r.x.row(g[s]) - r.x.row(g[s - 1]);
    }
  }
  const double scale = std::max(1.0, dd.cwiseAbs().maxCoeff());
  const bool all_zero = dd.cwiseAbs().maxCoeff() <= kVariationTolerance * scale;
  if (all_zero || (intercept && nearly_constant(dd, scale))) {
    throw Error(ErrorCode::kNoWithinVariation,
                all_zero ? "treatment never changes between consecutive periods"
                         : "differenced treatment is constant and collinear with the "
                           "intercept");
  }
  CausalEstimate e = pooled({dd, dx}, dy, intercept, PanelMethod::kFD);
  e.n_used = pds.n();
  e.diagnostics["differences"] = static_cast<double>(rows);
  return e;
}

CausalEstimate correlated_random_effects(const PanelDataset& pds, const Regressors& r,
                                         bool intercept) {
  require_periods(pds, PanelMethod::kCRE);
  const VectorXd d_bar = unit_means(pds, r.d);
  if ((r.d - d_bar).cwiseAbs().maxCoeff() <=
      kVariationTolerance * std::max(1.0, r.d.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kNoWithinVariation, "treatment is constant within every unit");
  }
  const MatrixXd x_bar = unit_means(pds, r.x);
  // Means of unit-constant covariates duplicate the covariate itself.
  std::vector<Index> keep;
  for (Index j = 0; j < r.x.cols(); ++j) {
    if ((r.x.col(j) - x_bar.col(j)).cwiseAbs().maxCoeff() >
        kVariationTolerance * std::max(1.0, r.x.col(j).cwiseAbs().maxCoeff())) {
      keep.push_back(j);
    }
  }
  MatrixXd extra(pds.n(), 1 + static_cast<Index>(keep.size()));
  extra.col(0) = d_bar;
  for (std::size_t j = 0; j < keep.size(); ++j) extra.col(1 + static_cast<Index>(j)) = x_bar.col(keep[j]);
  MatrixXd x_aug(pds.n(), r.x.cols() + extra.cols());
  x_aug << r.x, extra;
  return pooled({r.d, x_aug}, pds.y, intercept, PanelMethod::kCRE);
}

CausalEstimate random_effects(const PanelDataset& pds, const Regressors& r,
                              bool intercept) {
  const Index n = pds.n(), n_units = pds.n_units();
  const Index k = 1 + r.x.cols();
  const auto fallback = [&]() {
    CausalEstimate e = pooled(r, pds.y, intercept, PanelMethod::kPOLS);
    e.method = std::string(panel_method_name(PanelMethod::kRE));
    e.diagnostics["re_fallback_pols"] = 1.0;
    e.diagnostics["sigma2_alpha"] = 0.0;
    return e;
  };

  // Within regression: idiosyncratic variance.
  const VectorXd y_bar = unit_means(pds, pds.y);
  const VectorXd d_bar = unit_means(pds, r.d);
  const MatrixXd x_bar = unit_means(pds, r.x);
  const Index df_within = n - n_units - k;
  double sigma2_e = 0.0;
  bool within_ok = df_within > 0;
  if (within_ok) {
    try {
      const LinearFit w = fit_ols(stack(r.d - d_bar, r.x - x_bar, false), pds.y - y_bar);
      sigma2_e = w.residuals.squaredNorm() / static_cast<double>(df_within);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kRankDeficient) throw;
      within_ok = false;
    }
  }
  if (!within_ok) return fallback();

  // Between regression on unit means.
  const Index between_cols = (intercept ? 1 : 0) + k;
  if (n_units <= between_cols) return fallback();
  VectorXd yb(n_units), db(n_units);
  MatrixXd xb(n_units, r.x.cols());
  VectorXd periods(n_units);
  for (Index u = 0; u < n_units; ++u) {
    const Index row = pds.groups[static_cast<std::size_t>(u)].front();
    yb(u) = y_bar(row);
    db(u) = d_bar(row);
    xb.row(u) = x_bar.row(row);
    periods(u) = static_cast<double>(pds.groups[static_cast<std::size_t>(u)].size());
  }
  double sigma2_b = 0.0;
  try {
    const LinearFit b = fit_ols(stack(db, xb, intercept), yb);
    sigma2_b = b.residuals.squaredNorm() / static_cast<double>(n_units - between_cols);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kRankDeficient) throw;
    return fallback();
  }
  const double t_harmonic = static_cast<double>(n_units) / periods.cwiseInverse().sum();
  const double sigma2_alpha = sigma2_b - sigma2_e / t_harmonic;
  if (!(sigma2_alpha > 0.0)) return fallback();

  // Quasi-demeaning with unit-specific theta.
  VectorXd theta(n);
  for (Index u = 0; u < n_units; ++u) {
    const double t = periods(u);
    const double th = 1.0 - std::sqrt(sigma2_e / (sigma2_e + t * sigma2_alpha));
    for (Index row : pds.groups[static_cast<std::size_t>(u)]) theta(row) = th;
  }
  MatrixXd design = stack(r.d - theta.cwiseProduct(d_bar),
                          r.x - theta.asDiagonal() * x_bar, intercept);
  if (intercept) design.col(0) = VectorXd::Ones(n) - theta;
  const LinearFit fit = fit_ols(design, pds.y - theta.cwiseProduct(y_bar));
  CausalEstimate e = from_fit(fit, intercept ? 1 : 0, PanelMethod::kRE, n);
  e.diagnostics["sigma2_e"] = sigma2_e;
  e.diagnostics["sigma2_alpha"] = sigma2_alpha;
  e.diagnostics["re_fallback_pols"] = 0.0;
  return e;
}

}  // namespace

std::string_view panel_method_name(PanelMethod method) {
  switch (method) {
    case PanelMethod::kPOLS: return "POLS";
    case PanelMethod::kRE: return "RE";
    case PanelMethod::kFE: return "FE";
    case PanelMethod::kFD: return "FD";
    case PanelMethod::kCRE: return "CRE";
  }
  return "?";
}

CausalEstimate fit_panel(const PanelDataset& pds, const PanelSpec& spec) {
  if (pds.n() == 0) throw Error(ErrorCode::kEmptyDataset, "panel has no rows");
  const Regressors r = select(pds, spec);
  switch (spec.method) {
    case PanelMethod::kPOLS: return pooled(r, pds.y, spec.include_intercept, spec.method);
    case PanelMethod::kRE: return random_effects(pds, r, spec.include_intercept);
    case PanelMethod::kFE: return fixed_effects(pds, r);
    case PanelMethod::kFD: return first_difference(pds, r, spec.include_intercept);
    case PanelMethod::kCRE:
      return correlated_random_effects(pds, r, spec.include_intercept);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown panel method");
}

}  // namespace causalkit
