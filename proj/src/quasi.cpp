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

#include "causalkit/quasi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace causalkit {

namespace {

constexpr double kZeroCovariance = 1e-12;

void require_rows(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " has " + std::to_string(got) + " rows, expected " +
                    std::to_string(expected));
  }
}

MatrixXd hcat(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

CausalEstimate labelled(const char* method, double point, Index n_used) {
  CausalEstimate e;
  e.method = method;
  e.point = point;
  e.n_used = n_used;
  return e;
}

}  // namespace

// ---- Instrumental variables ----

CausalEstimate iv_ratio(const VectorXd& y, const VectorXd& d, const VectorXd& z) {
  const Index n = y.size();
  require_rows(n, d.size(), "treatment");
  require_rows(n, z.size(), "instrument");
  if (n < 2) throw Error(ErrorCode::kEmptyDataset, "need at least two observations");
  const VectorXd yc = y.array() - y.mean();
  const VectorXd dc = d.array() - d.mean();
  const VectorXd zc = z.array() - z.mean();
  const double s_zd = zc.dot(dc) / static_cast<double>(n);
  if (std::abs(s_zd) < kZeroCovariance) {
    throw Error(ErrorCode::kWeakOrZeroFirstStage,
                "instrument is uncorrelated with the treatment (cov " +
                    std::to_string(s_zd) + ")");
  }
  const double beta = zc.dot(yc) / static_cast<double>(n) / s_zd;
  CausalEstimate e = labelled("iv_ratio", beta, n);

  // Two points identify the slope but leave no residual degrees of freedom.
  if (n == 2) return e;
  const VectorXd u = yc - beta * dc;
  const double szz = zc.squaredNorm(), szd = zc.dot(dc);
  e.set_variance(u.squaredNorm() / static_cast<double>(n - 2) * szz / (szd * szd));

  const double slope = szd / szz;
  const VectorXd fs_resid = dc - slope * zc;
  const double se2 = fs_resid.squaredNorm() / static_cast<double>(n - 2) / szz;
  e.diagnostics["first_stage_f"] =
      se2 > 0.0 ? slope * slope / se2 : std::numeric_limits<double>::infinity();
  return e;
}

TwoStageFit fit_2sls(const VectorXd& y, const MatrixXd& endogenous,
                     const MatrixXd& excluded, const MatrixXd& exogenous) {
  const Index n = y.size();
  require_rows(n, endogenous.rows(), "endogenous block");
  require_rows(n, excluded.rows(), "instrument block");
  require_rows(n, exogenous.rows(), "exogenous block");
  const Index m = endogenous.cols(), l = excluded.cols();
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "no endogenous regressor");
  if (l < m) {
    throw Error(ErrorCode::kOrderConditionViolated,
                std::to_string(l) + " instruments for " + std::to_string(m) +
                    " endogenous regressors");
  }
  const MatrixXd instruments = hcat(excluded, exogenous);
  MatrixXd fitted(n, m);
  double first_stage_f = 0.0;
  for (Index j = 0; j < m; ++j) {
    const LinearFit fs = fit_ols(instruments, endogenous.col(j));
    fitted.col(j) = instruments * fs.coef;
    if (j == 0) {
      const double rss_u = fs.residuals.squaredNorm();
      const double rss_r = exogenous.cols() > 0
                               ? fit_ols(exogenous, endogenous.col(0)).residuals.squaredNorm()
                               : endogenous.col(0).squaredNorm();
      const Index df = n - instruments.cols();
      first_stage_f = rss_u > 0.0 && df > 0
                          ? ((rss_r - rss_u) / static_cast<double>(l)) /
                                (rss_u / static_cast<double>(df))
                          : std::numeric_limits<double>::infinity();
    }
  }
  const MatrixXd second_design = hcat(fitted, exogenous);
  const LinearFit ss = fit_ols(second_design, y);

  TwoStageFit out;
  out.coef = ss.coef;
  out.first_stage_f = first_stage_f;
  out.residuals = y - hcat(endogenous, exogenous) * ss.coef;
  const Index k = second_design.cols();
  if (n > k) {
    const double sigma2 = out.residuals.squaredNorm() / static_cast<double>(n - k);
    const MatrixXd gram = second_design.transpose() * second_design;
    out.coef_cov = sigma2 * gram.ldlt().solve(MatrixXd::Identity(k, k));
  }
  return out;
}

CausalEstimate ate_2sls(const ObservationalDataset& ds, const IvSpec& spec) {
  if (!ds.z) throw Error(ErrorCode::kInvalidArgument, "dataset has no instruments");
  const MatrixXd& z = *ds.z;
  MatrixXd excluded;
  if (spec.instrument_columns.empty()) {
    excluded = z;
  } else {
    excluded.resize(ds.n(), static_cast<Index>(spec.instrument_columns.size()));
    for (std::size_t j = 0; j < spec.instrument_columns.size(); ++j) {
      const Index c = spec.instrument_columns[j];
      if (c < 0 || c >= z.cols()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "instrument index " + std::to_string(c) + " out of range");
      }
      excluded.col(static_cast<Index>(j)) = z.col(c);
    }
  }
  const Index off = spec.intercept ? 1 : 0;
  MatrixXd exogenous(ds.n(), off + static_cast<Index>(spec.exogenous_covariates.size()));
  if (spec.intercept) exogenous.col(0).setOnes();
  for (std::size_t j = 0; j < spec.exogenous_covariates.size(); ++j) {
    const Index c = spec.exogenous_covariates[j];
    if (c < 0 || c >= ds.p()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "covariate index " + std::to_string(c) + " out of range");
    }
    exogenous.col(off + static_cast<Index>(j)) = ds.x.col(c);
  }
  const TwoStageFit fit = fit_2sls(ds.y, ds.d, excluded, exogenous);
  CausalEstimate e = labelled("2sls", fit.coef(0), ds.n());
  if (fit.coef_cov.size() > 0) e.set_variance(fit.coef_cov(0, 0));
  e.diagnostics["first_stage_f"] = fit.first_stage_f;
  e.diagnostics["instruments"] = static_cast<double>(excluded.cols());
  return e;
}

// ---- Difference in differences ----

namespace {

MatrixXd did_covariates(const DidDataset& dd) {
  if (dd.x.size() == 0) return MatrixXd(dd.n(), 0);
  require_rows(dd.n(), dd.x.rows(), "covariates");
  return dd.x;
}

void check_did_shape(const DidDataset& dd) {
  require_rows(dd.n(), static_cast<Index>(dd.group.size()), "group");
  require_rows(dd.n(), static_cast<Index>(dd.period.size()), "period");
  if (dd.n() == 0) throw Error(ErrorCode::kEmptyDataset, "no observations");
  if (!dd.y.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "non-finite outcome");
}

CausalEstimate two_by_two(const DidDataset& dd, const MatrixXd& extra, const char* method) {
  check_did_shape(dd);
  const Index n = dd.n();
  Index cells[2][2] = {{0, 0}, {0, 0}};
  MatrixXd design(n, 4 + extra.cols());
  for (Index i = 0; i < n; ++i) {
    const auto g = dd.group[static_cast<std::size_t>(i)];
    const auto t = dd.period[static_cast<std::size_t>(i)];
    if ((g != 0 && g != 1) || (t != 0 && t != 1)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "two-period design needs group and period coded 0/1");
    }
    ++cells[g][t];
    design(i, 0) = 1.0;
    design(i, 1) = static_cast<double>(g);
    design(i, 2) = static_cast<double>(t);
    design(i, 3) = static_cast<double>(g * t);
  }
  for (int g = 0; g < 2; ++g) {
    for (int t = 0; t < 2; ++t) {
      if (cells[g][t] == 0) {
        throw Error(ErrorCode::kEmptyCell, "no observations for group " + std::to_string(g) +
                                               " in period " + std::to_string(t));
      }
    }
  }
  design.rightCols(extra.cols()) = extra;
  const LinearFit fit = fit_ols(design, dd.y);
  CausalEstimate e = labelled(method, fit.coef(3), n);
  if (fit.coef_cov.size() > 0) e.set_variance(fit.coef_cov(3, 3));
  return e;
}

std::vector<std::int64_t> sorted_labels(const std::vector<std::int64_t>& v) {
  std::vector<std::int64_t> out(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

CausalEstimate ate_did(const DidDataset& dd) {
  return two_by_two(dd, MatrixXd(dd.n(), 0), "did");
}

CausalEstimate ate_did_covariates(const DidDataset& dd) {
  return two_by_two(dd, did_covariates(dd), "did_covariates");
}

CausalEstimate ate_did_multiperiod(const DidDataset& dd) {
  check_did_shape(dd);
  if (!dd.treated) {
    throw Error(ErrorCode::kInvalidArgument, "multiperiod design needs a treated indicator");
  }
  require_rows(dd.n(), dd.treated->size(), "treated indicator");
  const MatrixXd x = did_covariates(dd);
  const auto groups = sorted_labels(dd.group);
  const auto periods = sorted_labels(dd.period);
  const Index g_cols = static_cast<Index>(groups.size()) - 1;
  const Index t_cols = static_cast<Index>(periods.size()) - 1;
  const Index n = dd.n();
  MatrixXd design = MatrixXd::Zero(n, 1 + g_cols + t_cols + x.cols() + 1);
  for (Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    const auto gi = std::lower_bound(groups.begin(), groups.end(),
                                     dd.group[static_cast<std::size_t>(i)]) - groups.begin();
    const auto ti = std::lower_bound(periods.begin(), periods.end(),
                                     dd.period[static_cast<std::size_t>(i)]) - periods.begin();
    if (gi > 0) design(i, gi) = 1.0;
    if (ti > 0) design(i, g_cols + ti) = 1.0;
  }
  design.block(0, 1 + g_cols + t_cols, n, x.cols()) = x;
  design.col(design.cols() - 1) = *dd.treated;
  const LinearFit fit = fit_ols(design, dd.y);
  const Index k = design.cols() - 1;
  CausalEstimate e = labelled("did_multiperiod", fit.coef(k), n);
  if (fit.coef_cov.size() > 0) e.set_variance(fit.coef_cov(k, k));
  e.diagnostics["groups"] = static_cast<double>(groups.size());
  e.diagnostics["periods"] = static_cast<double>(periods.size());
  return e;
}

// ---- Synthetic control ----

namespace {

constexpr int kPgdMaxIter = 5000;
constexpr double kPgdTolerance = 1e-10;

double weighted_loss(const VectorXd& x1, const MatrixXd& x0, const VectorXd& v,
                     const VectorXd& w) {
  const VectorXd r = x1 - x0 * w;
  return r.dot(v.cwiseProduct(r));
}

// Nelder-Mead on an unconstrained objective.
VectorXd nelder_mead(const std::function<double(const VectorXd&)>& f, VectorXd start,
                     double step, int max_iter, double* best_value) {
  const Index k = start.size();
  std::vector<VectorXd> pts(static_cast<std::size_t>(k + 1), start);
  std::vector<double> val(static_cast<std::size_t>(k + 1));
  for (Index j = 0; j < k; ++j) pts[static_cast<std::size_t>(j + 1)](j) += step;
  for (std::size_t j = 0; j < pts.size(); ++j) val[j] = f(pts[j]);
  std::vector<std::size_t> order(pts.size());
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back();
    const std::size_t second = order[order.size() - 2];
    double size = 0.0;
    for (const auto& p : pts) size = std::max(size, (p - pts[best]).cwiseAbs().maxCoeff());
    if (val[worst] - val[best] <= 1e-14 * (1.0 + std::abs(val[best])) && size < 1e-9) break;

    VectorXd centroid = VectorXd::Zero(k);
    for (std::size_t j : order) {
      if (j != worst) centroid += pts[j];
    }
    centroid /= static_cast<double>(k);
    const VectorXd refl = centroid + (centroid - pts[worst]);
    const double f_refl = f(refl);
    if (f_refl < val[best]) {
      const VectorXd expd = centroid + 2.0 * (centroid - pts[worst]);
      const double f_expd = f(expd);
      if (f_expd < f_refl) {
        pts[worst] = expd;
        val[worst] = f_expd;
      } else {
        pts[worst] = refl;
        val[worst] = f_refl;
      }
      continue;
    }
    if (f_refl < val[second]) {
      pts[worst] = refl;
      val[worst] = f_refl;
      continue;
    }
    const VectorXd contr = centroid + 0.5 * (pts[worst] - centroid);
    const double f_contr = f(contr);
    if (f_contr < val[worst]) {
      pts[worst] = contr;
      val[worst] = f_contr;
      continue;
    }
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == best) continue;
      pts[j] = pts[best] + 0.5 * (pts[j] - pts[best]);
      val[j] = f(pts[j]);
    }
  }
  const auto it = std::min_element(val.begin(), val.end());
  *best_value = *it;
  return pts[static_cast<std::size_t>(it - val.begin())];
}

}  // namespace

VectorXd project_to_simplex(const VectorXd& v) {
  const Index k = v.size();
  std::vector<double> u(v.data(), v.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (Index j = 0; j < k; ++j) {
    css += u[static_cast<std::size_t>(j)];
    const double t = (css - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

VectorXd sc_weights(const VectorXd& x1, const MatrixXd& x0, const VectorXd& v_diag) {
  const Index k = x1.size(), j = x0.cols();
  require_rows(k, x0.rows(), "donor predictor matrix");
  require_rows(k, v_diag.size(), "predictor weights");
  if (j == 0) throw Error(ErrorCode::kDimensionMismatch, "no donor units");
  if (!v_diag.allFinite() || (v_diag.array() < 0.0).any() || !(v_diag.sum() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "predictor weights must be non-negative and not all zero");
  }
  if (j == 1) return VectorXd::Ones(1);
  for (Index c = 0; c < j; ++c) {
    if ((x0.col(c) - x1).cwiseAbs().maxCoeff() == 0.0) return VectorXd::Unit(j, c);
  }

  const MatrixXd q = x0.transpose() * v_diag.asDiagonal() * x0;
  const VectorXd c = x0.transpose() * v_diag.cwiseProduct(x1);
  const double lipschitz =
      2.0 * Eigen::SelfAdjointEigenSolver<MatrixXd>(q, Eigen::EigenvaluesOnly)
                .eigenvalues()
                .maxCoeff();
  VectorXd w = VectorXd::Constant(j, 1.0 / static_cast<double>(j));
  if (lipschitz > 0.0) {
    // Accelerated projected gradient with function-value restart.
    const auto obj = [&](const VectorXd& a) { return a.dot(q * a) - 2.0 * c.dot(a); };
    VectorXd y = w;
    double t = 1.0, f_w = obj(w);
    for (int it = 0; it < kPgdMaxIter; ++it) {
      const VectorXd grad = 2.0 * (q * y - c);
      const VectorXd w_next = project_to_simplex(y - grad / lipschitz);
      const double step_norm = lipschitz * (w_next - y).norm();
      const double f_next = obj(w_next);
      if (f_next > f_w) {
        t = 1.0;
        y = w;
        continue;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = w_next + ((t - 1.0) / t_next) * (w_next - w);
      w = w_next;
      f_w = f_next;
      t = t_next;
      if (step_norm < kPgdTolerance) break;
    }
  }
  // Never return something worse than the best single donor.
  double best = weighted_loss(x1, x0, v_diag, w);
  Index best_vertex = -1;
  for (Index col = 0; col < j; ++col) {
    const double f = weighted_loss(x1, x0, v_diag, VectorXd::Unit(j, col));
    if (f < best) {
      best = f;
      best_vertex = col;
    }
  }
  return best_vertex >= 0 ? VectorXd::Unit(j, best_vertex) : w;
}

ScResult sc_fit(const ScProblem& p) {
  const Index j = p.x0.cols();
  const Index k = p.x1.size();
  require_rows(k, p.x0.rows(), "donor predictor matrix");
  require_rows(p.z1.size(), p.z0.rows(), "donor pre-period matrix");
  require_rows(p.y1.size(), p.y0.rows(), "donor post-period matrix");
  if (j == 0 || p.z0.cols() != j || p.y0.cols() != j) {
    throw Error(ErrorCode::kDimensionMismatch, "donor matrices disagree on the donor count");
  }
  if (k == 0 || p.z1.size() == 0 || p.y1.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "need predictors, pre-period and post-period outcomes");
  }
  if (j >= 2) {
    bool identical = true;
    for (Index c = 1; c < j && identical; ++c) {
      identical = p.x0.col(c) == p.x0.col(0) && p.z0.col(c) == p.z0.col(0);
    }
    if (identical) throw Error(ErrorCode::kDegenerateProblem, "all donors are identical");
  }

  const auto pre_loss = [&](const VectorXd& w) { return (p.z1 - p.z0 * w).squaredNorm(); };
  VectorXd v_best = VectorXd::Ones(k);
  double loss_best = std::numeric_limits<double>::infinity();
  if (k == 1) {
    loss_best = pre_loss(sc_weights(p.x1, p.x0, v_best));
  } else {
    const auto to_v = [k](const VectorXd& u) {
      VectorXd full(k);
      full.head(k - 1) = u;
      full(k - 1) = 1.0 - u.sum();
      return project_to_simplex(full);
    };
    const auto objective = [&](const VectorXd& u) {
      return pre_loss(sc_weights(p.x1, p.x0, to_v(u)));
    };
    std::vector<VectorXd> starts;
    starts.push_back(VectorXd::Constant(k - 1, 1.0 / static_cast<double>(k)));
    for (Index c = 0; c < k; ++c) {
      starts.push_back(c < k - 1 ? VectorXd(VectorXd::Unit(k - 1, c))
                                 : VectorXd(VectorXd::Zero(k - 1)));
    }
    const int max_iter = 200 * static_cast<int>(k);
    for (const auto& s : starts) {
      double value = 0.0;
      const VectorXd u = nelder_mead(objective, s, 0.1, max_iter, &value);
      if (value < loss_best) {
        loss_best = value;
        v_best = to_v(u);
      }
    }
  }

  ScResult out;
  out.v = v_best;
  out.weights = sc_weights(p.x1, p.x0, v_best);
  out.pre_loss = pre_loss(out.weights);
  out.gap = p.y1 - p.y0 * out.weights;
  out.estimate = labelled("synthetic_control", out.gap.mean(), j + 1);
  out.estimate.diagnostics["pre_loss"] = out.pre_loss;
  out.estimate.diagnostics["donors_used"] =
      static_cast<double>((out.weights.array() > 1e-8).count());
  return out;
}

// ---- Regression discontinuity ----

namespace {

struct RddWindow {
  std::vector<Index> rows;
  Index left = 0;
  Index right = 0;
};

RddWindow window(const VectorXd& t, double cutoff, const RddSpec& spec) {
  if (spec.bandwidth && !(*spec.bandwidth > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth must be positive");
  }
  RddWindow w;
  for (Index i = 0; i < t.size(); ++i) {
    if (spec.bandwidth && std::abs(t(i) - cutoff) > *spec.bandwidth) continue;
    w.rows.push_back(i);
    (t(i) >= cutoff ? w.right : w.left)++;
  }
  if (w.left == 0 || w.right == 0) {
    throw Error(ErrorCode::kOneSidedData,
                std::to_string(w.left) + " observations below and " +
                    std::to_string(w.right) + " at or above the cutoff");
  }
  return w;
}

// Columns (1, Z, t - c, Z (t - c)) over the window rows.
MatrixXd rdd_design(const VectorXd& t, double cutoff, const RddWindow& w) {
  MatrixXd m(static_cast<Index>(w.rows.size()), 4);
  for (std::size_t r = 0; r < w.rows.size(); ++r) {
    const double tc = t(w.rows[r]) - cutoff;
    const double above = tc >= 0.0 ? 1.0 : 0.0;
    m.row(static_cast<Index>(r)) << 1.0, above, tc, above * tc;
  }
  return m;
}

VectorXd gather(const VectorXd& v, const std::vector<Index>& rows) {
  VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r)) = v(rows[r]);
  return out;
}

}  // namespace

CausalEstimate rdd_sharp(const VectorXd& y, const VectorXd& t, double cutoff,
                         const RddSpec& spec) {
  require_rows(y.size(), t.size(), "running variable");
  const RddWindow w = window(t, cutoff, spec);
  const LinearFit fit = fit_ols(rdd_design(t, cutoff, w), gather(y, w.rows));
  CausalEstimate e = labelled("rdd_sharp", fit.coef(1), static_cast<Index>(w.rows.size()));
  if (fit.coef_cov.size() > 0) e.set_variance(fit.coef_cov(1, 1));
  e.diagnostics["n_left"] = static_cast<double>(w.left);
  e.diagnostics["n_right"] = static_cast<double>(w.right);
  return e;
}

CausalEstimate rdd_fuzzy(const VectorXd& y, const VectorXd& t, const VectorXd& d,
                         double cutoff, const RddSpec& spec) {
  require_rows(y.size(), t.size(), "running variable");
  require_rows(y.size(), d.size(), "treatment");
  const RddWindow w = window(t, cutoff, spec);
  const MatrixXd full = rdd_design(t, cutoff, w);
  const VectorXd yw = gather(y, w.rows), dw = gather(d, w.rows);
  const double jump = fit_ols(full, dw).coef(1);
  if (!(std::abs(jump) > kMinFirstStageJump)) {
    throw Error(ErrorCode::kNoFirstStageJump,
                "treatment probability jumps by " + std::to_string(jump) + " at the cutoff");
  }
  MatrixXd exogenous(full.rows(), 3);
  exogenous << full.col(0), full.col(2), full.col(3);
  const TwoStageFit fit = fit_2sls(yw, dw, full.col(1), exogenous);
  CausalEstimate e = labelled("rdd_fuzzy", fit.coef(0), static_cast<Index>(w.rows.size()));
  if (fit.coef_cov.size() > 0) e.set_variance(fit.coef_cov(0, 0));
  e.diagnostics["first_stage_jump"] = jump;
  e.diagnostics["first_stage_f"] = fit.first_stage_f;
  e.diagnostics["n_left"] = static_cast<double>(w.left);
  e.diagnostics["n_right"] = static_cast<double>(w.right);
  return e;
}

}  // namespace causalkit
