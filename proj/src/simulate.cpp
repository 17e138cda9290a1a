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

#include "causalkit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "causalkit/estimators.hpp"
#include "causalkit/panel.hpp"
#include "causalkit/propensity.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

namespace {

double param(const ParamMap& p, const char* name) {
  const auto it = p.find(name);
  if (it == p.end()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing parameter ") + name);
  }
  return it->second;
}

double sd_of(const ParamMap& p, const char* variance_name) {
  const double v = param(p, variance_name);
  if (!(v >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(variance_name) + " must be non-negative");
  }
  return std::sqrt(v);
}

ParamMap resolve(const DgpSpec& spec) {
  ParamMap p = default_params(spec.case_id);
  for (const auto& [k, v] : spec.params) {
    if (!p.count(k)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown parameter '" + k + "' for " + std::string(case_name(spec.case_id)));
    }
    p[k] = v;
  }
  return p;
}

// Stream for variable `var` of one run.
Stream stream(const DgpSpec& spec, std::uint64_t run, std::uint64_t var) {
  return Stream::derive({spec.seed, static_cast<std::uint64_t>(spec.case_id), run, var});
}

VectorXd normals(Stream s, Index n, double mean, double sd) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = s.normal(mean, sd);
  return v;
}

VectorXd uniforms(Stream s, Index n, double lo, double hi) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = s.uniform(lo, hi);
  return v;
}

VectorXd bernoullis(Stream s, const VectorXd& p) {
  VectorXd v(p.size());
  for (Index i = 0; i < p.size(); ++i) v(i) = s.bernoulli(p(i)) ? 1.0 : 0.0;
  return v;
}

VectorXd expit_of(const VectorXd& eta) {
  VectorXd p(eta.size());
  for (Index i = 0; i < eta.size(); ++i) p(i) = expit(eta(i));
  return p;
}

Draw generate_cs1(const DgpSpec& spec, const ParamMap& p, std::uint64_t run) {
  const Index n = spec.n;
  const VectorXd x = normals(stream(spec, run, 0), n, param(p, "x_mean"), sd_of(p, "x_var"));
  const VectorXd ps = expit_of((param(p, "alpha0") + param(p, "alpha1") * x.array()).matrix());
  const VectorXd d = bernoullis(stream(spec, run, 1), ps);
  const VectorXd y = (param(p, "beta0") + param(p, "tau") * d.array() +
                      param(p, "beta1") * x.array())
                         .matrix() +
                     normals(stream(spec, run, 2), n, 0.0, sd_of(p, "y_var"));
  // Misspecified score: normal around the mean true score, redrawn until
  // it falls inside the truncation bounds.
  const double lo = param(p, "ps_wrong_lo"), hi = param(p, "ps_wrong_hi");
  const double centre = ps.mean(), spread = param(p, "ps_wrong_sd");
  if (!(lo < hi) || centre < lo || centre > hi) {
    throw Error(ErrorCode::kInvalidArgument, "bad truncation bounds for the wrong score");
  }
  Stream s = stream(spec, run, 3);
  VectorXd wrong(n);
  for (Index i = 0; i < n; ++i) {
    double v = s.normal(centre, spread);
    while (v < lo || v > hi) v = s.normal(centre, spread);
    wrong(i) = v;
  }
  Draw draw{validate(RawColumns{y, d, x, std::nullopt}, TreatmentKind::kBinary), {}};
  draw.aux["ps_true"] = ps;
  draw.aux["ps_wrong"] = wrong;
  return draw;
}

Draw generate_panel(const DgpSpec& spec, const ParamMap& p, std::uint64_t run,
                    bool time_varying) {
  const auto periods = static_cast<Index>(param(p, "periods"));
  if (periods < 2 || spec.n % periods != 0 || spec.n / periods < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "n must be a multiple of the period count with at least two units");
  }
  const Index units = spec.n / periods, n = spec.n;
  const VectorXd w_unit =
      uniforms(stream(spec, run, 0), units, param(p, "w_lo"), param(p, "w_hi"));
  const VectorXd d_noise = normals(stream(spec, run, 1), n, param(p, "mu_d"), sd_of(p, "var_d"));
  const VectorXd e = normals(stream(spec, run, 2), n, 0.0, sd_of(p, "var_e"));
  VectorXd w_shock = VectorXd::Zero(n);
  if (time_varying) w_shock = normals(stream(spec, run, 3), n, param(p, "mu_w"), sd_of(p, "var_w"));
  std::vector<std::int64_t> unit(static_cast<std::size_t>(n)), time(static_cast<std::size_t>(n));
  VectorXd y(n), d(n);
  const double delta = param(p, "delta"), alpha = param(p, "alpha"), tau = param(p, "tau"),
               gamma = param(p, "gamma");
  for (Index u = 0; u < units; ++u) {
    for (Index t = 0; t < periods; ++t) {
      const Index r = u * periods + t;
      unit[static_cast<std::size_t>(r)] = u;
      time[static_cast<std::size_t>(r)] = t;
      const double w = w_unit(u) + w_shock(r);
      d(r) = delta * w + d_noise(r);
      y(r) = alpha + tau * d(r) + gamma * w + e(r);
    }
  }
  return {validate_panel(std::move(unit), std::move(time), std::move(y), std::move(d),
                         MatrixXd(n, 0)),
          {}};
}

Draw generate_cs4(const DgpSpec& spec, const ParamMap& p, std::uint64_t run) {
  const Index n = spec.n;
  const double x_mean = param(p, "x_mean");
  const VectorXd x = normals(stream(spec, run, 0), n, x_mean, sd_of(p, "x_var"));
  const VectorXd z = normals(stream(spec, run, 1), n, 0.0, sd_of(p, "z_var"));
  const VectorXd d = (param(p, "alpha0") + param(p, "alpha1") * x.array() +
                      param(p, "alpha2") * z.array())
                         .matrix() +
                     normals(stream(spec, run, 2), n, 0.0, sd_of(p, "var_d"));
  const VectorXd y = (param(p, "beta0") + param(p, "tau") * d.array() +
                      param(p, "beta1") * x.array())
                         .matrix() +
                     normals(stream(spec, run, 3), n, 0.0, sd_of(p, "var_y"));
  MatrixXd instruments(n, 2);
  instruments.col(0) = z;
  instruments.col(1) = z.array() + param(p, "bad_loading") * (x.array() - x_mean);
  return {validate(RawColumns{y, d, x, instruments}, TreatmentKind::kContinuous), {}};
}

Draw generate_cs5(const DgpSpec& spec, const ParamMap& p, std::uint64_t run) {
  const Index units = spec.n;
  const bool violated = spec.variant == "violated";
  const bool fresh = spec.variant == "cross_section";
  const double alpha = param(p, "alpha"), b_x0 = param(p, "beta_x0"), tau = param(p, "tau");
  const double b_d[2] = {param(p, "beta_d0"), param(p, "beta_d1")};
  const double sd_y[2] = {sd_of(p, "var_y0"), sd_of(p, "var_y1")};

  DidDataset dd;
  dd.y.resize(2 * units);
  dd.x.resize(2 * units, 1);
  dd.group.resize(static_cast<std::size_t>(2 * units));
  dd.period.resize(static_cast<std::size_t>(2 * units));
  const VectorXd x1 =
      normals(stream(spec, run, 4), units, param(p, "x1_mean"), sd_of(p, "x1_var"));
  for (int t = 0; t < 2; ++t) {
    // A cross-section draws new units for the second period.
    const std::uint64_t base = (fresh && t == 1) ? 5 : 0;
    const VectorXd x0 = normals(stream(spec, run, base), units, 0.0, 1.0);
    const VectorXd treat =
        bernoullis(stream(spec, run, base + 1), expit_of((alpha * x0.array()).matrix()));
    const VectorXd noise = normals(stream(spec, run, 2 + t), units, 0.0, sd_y[t]);
    for (Index i = 0; i < units; ++i) {
      const Index r = t * units + i;
      double y = b_d[t] + treat(i) + b_x0 * x0(i) + noise(i);
      if (t == 1) {
        y += tau * treat(i);
        if (violated) y += param(p, "beta_x1") * x1(i) * (1.0 - treat(i));
      }
      dd.y(r) = y;
      dd.x(r, 0) = x0(i);
      dd.group[static_cast<std::size_t>(r)] = static_cast<std::int64_t>(treat(i));
      dd.period[static_cast<std::size_t>(r)] = t;
    }
  }
  return {std::move(dd), {}};
}

Draw generate_cs6(const DgpSpec& spec, const ParamMap& p, std::uint64_t run) {
  const Index n = spec.n;
  const double cutoff = param(p, "cutoff");
  const VectorXd t = uniforms(stream(spec, run, 0), n, param(p, "t_lo"), param(p, "t_hi"));
  const double sd = spec.variant == "noiseless" ? 0.0 : sd_of(p, "var_y");
  const VectorXd noise = normals(stream(spec, run, 1), n, 0.0, sd);
  Stream flip = stream(spec, run, 2);
  const double band = param(p, "fuzzy_band"), share = param(p, "fuzzy_share");
  VectorXd d(n), y(n);
  for (Index i = 0; i < n; ++i) {
    d(i) = t(i) >= cutoff ? 1.0 : 0.0;
    // One uniform per unit keeps the flip stream aligned across variants.
    const bool flipped = flip.uniform() < share;
    if (spec.variant == "fuzzy" && std::abs(t(i) - cutoff) < band && flipped) d(i) = 1.0 - d(i);
    y(i) = param(p, "alpha") + param(p, "beta") * t(i) + param(p, "tau") * d(i) + noise(i);
  }
  MatrixXd x(n, 1);
  x.col(0) = t;
  Draw draw{validate(RawColumns{y, d, x, std::nullopt}, TreatmentKind::kBinary), {}};
  draw.aux["cutoff"] = VectorXd::Constant(1, cutoff);
  return draw;
}

// ---- method helpers ----

const ObservationalDataset& obs(const Draw& draw) {
  return std::get<ObservationalDataset>(draw.data);
}

OrSpec covariates(std::vector<Index> cols) {
  OrSpec s;
  s.covariates = std::move(cols);
  return s;
}

double cs6_running_estimate(const Draw& draw, bool fuzzy) {
  const auto& ds = obs(draw);
  const double cutoff = draw.aux.at("cutoff")(0);
  return fuzzy ? rdd_fuzzy(ds.y, ds.x.col(0), ds.d, cutoff).point
               : rdd_sharp(ds.y, ds.x.col(0), cutoff).point;
}

}  // namespace

std::string_view case_name(CaseId id) {
  switch (id) {
    case CaseId::kCS1: return "cs1";
    case CaseId::kCS2: return "cs2";
    case CaseId::kCS3: return "cs3";
    case CaseId::kCS4: return "cs4";
    case CaseId::kCS5: return "cs5";
    case CaseId::kCS6: return "cs6";
  }
  return "?";
}

CaseId parse_case(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (int k = 1; k <= 6; ++k) {
    if (case_name(static_cast<CaseId>(k)) == lower) return static_cast<CaseId>(k);
  }
  throw Error(ErrorCode::kUnknownCase, "unknown case '" + std::string(name) + "'");
}

ParamMap default_params(CaseId id) {
  switch (id) {
    case CaseId::kCS1:
      return {{"x_mean", 0.0},   {"x_var", 10.0},      {"alpha0", 2.0},
              {"alpha1", 0.5},   {"beta0", 10.0},      {"tau", -5.0},
              {"beta1", 0.5},    {"y_var", 5.0},       {"ps_wrong_sd", 0.5},
              {"ps_wrong_lo", 0.01}, {"ps_wrong_hi", 0.99}};
    case CaseId::kCS2:
    case CaseId::kCS3:
      return {{"delta", 2.0}, {"alpha", 1.0}, {"tau", 0.0},   {"gamma", 2.0},
              {"mu_d", 0.0},  {"var_d", 10.0}, {"var_e", 1.0}, {"w_lo", 1.0},
              {"w_hi", 100.0}, {"mu_w", 0.0},  {"var_w", 25.0}, {"periods", 5.0}};
    case CaseId::kCS4:
      return {{"x_mean", 15.0}, {"x_var", 1.0}, {"z_var", 1.0},  {"alpha0", 1.0},
              {"alpha1", 0.5},  {"alpha2", 1.0}, {"var_d", 0.0}, {"beta0", 1.0},
              {"tau", -1.0},    {"beta1", 0.5},  {"var_y", 1.0}, {"bad_loading", 2.0}};
    case CaseId::kCS5:
      return {{"alpha", 1.0},  {"beta_d0", 0.0}, {"beta_d1", 2.0}, {"beta_x0", 1.0},
              {"tau", -4.0},   {"var_y0", 1.0},  {"var_y1", 1.0},  {"x1_mean", 1.0},
              {"x1_var", 1.0}, {"beta_x1", 1.0}};
    case CaseId::kCS6:
      return {{"alpha", 1.0}, {"beta", 2.0},  {"tau", 5.0},          {"var_y", 1.0},
              {"cutoff", 0.0}, {"t_lo", -1.0}, {"t_hi", 1.0},       {"fuzzy_band", 0.25},
              {"fuzzy_share", 0.25}};
  }
  throw Error(ErrorCode::kUnknownCase, "unknown case id");
}

std::vector<std::string> case_variants(CaseId id) {
  switch (id) {
    case CaseId::kCS5: return {"", "violated", "cross_section"};
    case CaseId::kCS6: return {"", "fuzzy", "noiseless"};
    default: return {""};
  }
}

Draw generate(const DgpSpec& spec, std::uint64_t run_index) {
  if (spec.n < 10) throw Error(ErrorCode::kInvalidArgument, "n must be at least 10");
  const auto variants = case_variants(spec.case_id);
  if (std::find(variants.begin(), variants.end(), spec.variant) == variants.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown variant '" + spec.variant + "' for " +
                                                 std::string(case_name(spec.case_id)));
  }
  const ParamMap p = resolve(spec);
  switch (spec.case_id) {
    case CaseId::kCS1: return generate_cs1(spec, p, run_index);
    case CaseId::kCS2: return generate_panel(spec, p, run_index, false);
    case CaseId::kCS3: return generate_panel(spec, p, run_index, true);
    case CaseId::kCS4: return generate_cs4(spec, p, run_index);
    case CaseId::kCS5: return generate_cs5(spec, p, run_index);
    case CaseId::kCS6: return generate_cs6(spec, p, run_index);
  }
  throw Error(ErrorCode::kUnknownCase, "unknown case id");
}

std::vector<MethodDef> case_methods(CaseId id) {
  std::vector<MethodDef> m;
  switch (id) {
    case CaseId::kCS1: {
      const auto fitted = [](const Draw& d) { return estimate_propensity_binary(obs(d)); };
      const auto wrong = [](const Draw& d) {
        return propensity_from_scores(d.aux.at("ps_wrong"));
      };
      m.push_back({"OR1", "", [](const Draw& d) {
                     return ate_or(obs(d), covariates({0}), 1.0, 0.0).point;
                   }});
      m.push_back({"OR2", "", [](const Draw& d) {
                     return ate_or(obs(d), covariates({}), 1.0, 0.0).point;
                   }});
      m.push_back({"PS1", "", [=](const Draw& d) {
                     return ate_ipw(obs(d), fitted(d), 1.0, 0.0).point;
                   }});
      m.push_back({"PS2", "", [=](const Draw& d) {
                     return ate_ipw(obs(d), wrong(d), 1.0, 0.0).point;
                   }});
      m.push_back({"DR1", "", [=](const Draw& d) {
                     return ate_dr(obs(d), covariates({}), fitted(d), 1.0, 0.0).point;
                   }});
      m.push_back({"DR2", "", [=](const Draw& d) {
                     return ate_dr(obs(d), covariates({0}), wrong(d), 1.0, 0.0).point;
                   }});
      m.push_back({"DR3", "", [=](const Draw& d) {
                     return ate_dr(obs(d), covariates({}), wrong(d), 1.0, 0.0).point;
                   }});
      m.push_back({"PSR", "", [=](const Draw& d) {
                     return ate_psr(obs(d), fitted(d), 1.0, 0.0, 2).point;
                   }});
      m.push_back({"PSS", "", [=](const Draw& d) {
                     return ate_stratification(obs(d), fitted(d), 5).point;
                   }});
      m.push_back({"MATCH", "", [=](const Draw& d) {
                     return ate_matching(obs(d), fitted(d), 1).point;
                   }});
      break;
    }
    case CaseId::kCS2:
    case CaseId::kCS3: {
      for (PanelMethod pm : {PanelMethod::kPOLS, PanelMethod::kRE, PanelMethod::kFD,
                             PanelMethod::kFE, PanelMethod::kCRE}) {
        m.push_back({std::string(panel_method_name(pm)), "", [pm](const Draw& d) {
                       PanelSpec spec;
                       spec.method = pm;
                       return fit_panel(std::get<PanelDataset>(d.data), spec).point;
                     }});
      }
      break;
    }
    case CaseId::kCS4: {
      const auto iv = [](Index column) {
        return [column](const Draw& d) {
          IvSpec spec;
          spec.instrument_columns = {column};
          return ate_2sls(obs(d), spec).point;
        };
      };
      m.push_back({"OR_correct", "", [](const Draw& d) {
                     return ate_or(obs(d), covariates({0}), 1.0, 0.0).point;
                   }});
      m.push_back({"OR_naive", "", [](const Draw& d) {
                     return ate_or(obs(d), covariates({}), 1.0, 0.0).point;
                   }});
      m.push_back({"IV1", "", iv(0)});
      m.push_back({"IV2", "", iv(1)});
      break;
    }
    case CaseId::kCS5: {
      const auto did = [](const Draw& d) { return ate_did(std::get<DidDataset>(d.data)).point; };
      const auto didx = [](const Draw& d) {
        return ate_did_covariates(std::get<DidDataset>(d.data)).point;
      };
      m.push_back({"DID1", "", did});
      m.push_back({"DID2", "violated", did});
      m.push_back({"DID_XS", "cross_section", did});
      m.push_back({"DIDX_XS", "cross_section", didx});
      break;
    }
    case CaseId::kCS6: {
      m.push_back({"RDD1", "", [](const Draw& d) { return cs6_running_estimate(d, false); }});
      m.push_back({"RDD2", "fuzzy", [](const Draw& d) {
                     return cs6_running_estimate(d, false);
                   }});
      m.push_back({"RDD3", "fuzzy", [](const Draw& d) {
                     return cs6_running_estimate(d, true);
                   }});
      break;
    }
  }
  return m;
}

std::vector<std::string> default_methods(CaseId id) {
  switch (id) {
    case CaseId::kCS1: return {"OR1", "OR2", "PS1", "PS2", "DR1", "DR2", "DR3"};
    case CaseId::kCS2:
    case CaseId::kCS3: return {"POLS", "RE", "FD", "FE", "CRE"};
    case CaseId::kCS4: return {"OR_correct", "OR_naive", "IV1", "IV2"};
    case CaseId::kCS5: return {"DID1", "DID2"};
    case CaseId::kCS6: return {"RDD1", "RDD2", "RDD3"};
  }
  return {};
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

std::vector<MethodSummary> summarize(const std::vector<std::string>& methods,
                                     const MatrixXd& estimates, double true_effect) {
  std::vector<MethodSummary> rows;
  const Index runs = estimates.rows();
  for (std::size_t j = 0; j < methods.size(); ++j) {
    std::vector<double> ok;
    ok.reserve(static_cast<std::size_t>(runs));
    for (Index r = 0; r < runs; ++r) {
      const double v = estimates(r, static_cast<Index>(j));
      if (std::isfinite(v)) ok.push_back(v);
    }
    MethodSummary s;
    s.method = methods[j];
    s.failed = static_cast<int>(runs - static_cast<Index>(ok.size()));
    if (static_cast<double>(s.failed) > kMaxFailedRunShare * static_cast<double>(runs) ||
        ok.size() < 2) {
      throw Error(ErrorCode::kTooManyFailedRuns,
                  methods[j] + " failed in " + std::to_string(s.failed) + " of " +
                      std::to_string(runs) + " runs");
    }
    const double mean = pairwise_sum(ok.data(), ok.size()) / static_cast<double>(ok.size());
    std::vector<double> sq(ok.size());
    for (std::size_t r = 0; r < ok.size(); ++r) sq[r] = (ok[r] - mean) * (ok[r] - mean);
    s.av_est = mean;
    s.emp_var = pairwise_sum(sq.data(), sq.size()) / static_cast<double>(ok.size() - 1);
    s.bias = mean - true_effect;
    s.mse = s.emp_var + s.bias * s.bias;
    rows.push_back(std::move(s));
  }
  return rows;
}

namespace {

struct Plan {
  std::vector<MethodDef> methods;
  std::vector<std::string> names;
  std::vector<std::string> variants;  // distinct, in first-use order
  std::vector<std::size_t> variant_of;
  DgpSpec spec;
};

Plan make_plan(const MonteCarloOptions& o) {
  if (o.runs < 2) throw Error(ErrorCode::kInvalidArgument, "runs must be at least 2");
  Plan plan;
  plan.spec.case_id = o.case_id;
  plan.spec.n = o.n;
  plan.spec.seed = o.seed;
  plan.spec.params = o.params;
  plan.names = o.methods.empty() ? default_methods(o.case_id) : o.methods;
  const auto all = case_methods(o.case_id);
  for (const auto& name : plan.names) {
    const auto it = std::find_if(all.begin(), all.end(),
                                 [&](const MethodDef& m) { return m.name == name; });
    if (it == all.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown method '" + name + "' for " + std::string(case_name(o.case_id)));
    }
    plan.methods.push_back(*it);
    const auto v = std::find(plan.variants.begin(), plan.variants.end(), it->variant);
    plan.variant_of.push_back(static_cast<std::size_t>(v - plan.variants.begin()));
    if (v == plan.variants.end()) plan.variants.push_back(it->variant);
  }
  // Fail early on bad parameters rather than inside every run.
  (void)resolve(plan.spec);
  return plan;
}

void run_one(const Plan& plan, int run, MatrixXd& estimates) {
  std::vector<std::optional<Draw>> draws(plan.variants.size());
  for (std::size_t j = 0; j < plan.methods.size(); ++j) {
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      auto& draw = draws[plan.variant_of[j]];
      if (!draw) {
        DgpSpec spec = plan.spec;
        spec.variant = plan.variants[plan.variant_of[j]];
        draw = generate(spec, static_cast<std::uint64_t>(run));
      }
      value = plan.methods[j].estimate(*draw);
    } catch (const std::exception&) {
      // Counted as a failed run for this method.
    }
    estimates(run, static_cast<Index>(j)) = value;
  }
}

MonteCarloReport finish(const MonteCarloOptions& o, const Plan& plan, MatrixXd estimates) {
  MonteCarloReport report;
  report.case_id = o.case_id;
  report.runs = o.runs;
  report.n = o.n;
  report.seed = o.seed;
  report.params = resolve(plan.spec);
  report.true_effect = report.params.at("tau");
  report.rows = summarize(plan.names, estimates, report.true_effect);
  report.estimates = std::move(estimates);
  return report;
}

}  // namespace

MonteCarloReport run_monte_carlo(const MonteCarloOptions& options) {
  const Plan plan = make_plan(options);
  MatrixXd estimates(options.runs, static_cast<Index>(plan.methods.size()));
  const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int r = 0; r < options.runs; ++r) run_one(plan, r, estimates);
  return finish(options, plan, std::move(estimates));
}

MonteCarloReport run_monte_carlo_serial(const MonteCarloOptions& options) {
  const Plan plan = make_plan(options);
  MatrixXd estimates(options.runs, static_cast<Index>(plan.methods.size()));
  for (int r = 0; r < options.runs; ++r) run_one(plan, r, estimates);
  return finish(options, plan, std::move(estimates));
}

NoiseCalibration calibrate_cs1_noise_reading(int runs, Index n, std::uint64_t seed,
                                             double target) {
  NoiseCalibration cal;
  cal.target = target;
  MonteCarloOptions o;
  o.case_id = CaseId::kCS1;
  o.methods = {"OR2"};
  o.runs = runs;
  o.n = n;
  o.seed = seed;
  const double spread = default_params(CaseId::kCS1).at("x_var");
  o.params["x_var"] = spread;
  cal.or2_variance = run_monte_carlo(o).rows.front().av_est;
  o.params["x_var"] = spread * spread;
  cal.or2_sd = run_monte_carlo(o).rows.front().av_est;
  cal.chosen = std::abs(cal.or2_variance - target) <= std::abs(cal.or2_sd - target)
                   ? "variance"
                   : "sd";
  return cal;
}

}  // namespace causalkit
