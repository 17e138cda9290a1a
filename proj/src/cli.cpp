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

#include "causalkit/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "causalkit/csv.hpp"
#include "causalkit/estimators.hpp"
#include "causalkit/panel.hpp"
#include "causalkit/propensity.hpp"
#include "causalkit/quasi.hpp"
#include "causalkit/simulate.hpp"
#include "causalkit/variance.hpp"
#include "json.hpp"

namespace causalkit {

namespace {

using nlohmann::json;

struct EstimateArgs {
  std::string method;
  std::string data;
  std::string outcome;
  std::string treatment;
  std::vector<std::string> covariates;
  std::vector<std::string> instruments;
  std::string unit;
  std::string time;
  std::string running;
  double cutoff = 0.0;
  std::optional<double> bandwidth;
  std::string panel_method = "fe";
  double dose = 1.0;
  double reference = 0.0;
  int bootstrap = 0;
  std::uint64_t seed = 42;
  std::vector<double> trim{kDefaultTrimLo, kDefaultTrimHi};
  std::string format = "json";
  int jobs = 0;
};

struct SimulateArgs {
  std::string case_name;
  int runs = 1000;
  Index n = 1000;
  std::uint64_t seed = 42;
  std::string out = ".";
  int jobs = 0;
  std::vector<std::string> methods;
  std::vector<std::string> params;
  std::string check;
  std::string tol_file;
  int calibration_runs = 200;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_flag(const std::string& value, const char* flag, const std::string& method) {
  if (value.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required for " + method);
  }
}

// ---- estimate ----

CausalEstimate with_trimmed_scores(
    const ObservationalDataset& ds, const EstimateArgs& a,
    const std::function<CausalEstimate(const ObservationalDataset&, const PropensityFit&)>& f) {
  const PropensityFit full = estimate_propensity_binary(ds);
  auto [trimmed, kept] = trim_overlap(full, a.trim[0], a.trim[1]);
  const ObservationalDataset sub = take_rows(ds, kept);
  CausalEstimate e = f(sub, trimmed);
  e.diagnostics["trimmed"] = static_cast<double>(trimmed.dropped);
  return e;
}

CausalEstimate estimate_cross(const ObservationalDataset& ds, const EstimateArgs& a) {
  const std::string& m = a.method;
  if (m == "dim") return difference_in_means(ds);
  if (m == "or") return ate_or(ds, OrSpec::all_covariates(ds), a.dose, a.reference);
  if (m == "ipw") {
    return with_trimmed_scores(ds, a, [&](const ObservationalDataset& s, const PropensityFit& p) {
      return ate_ipw(s, p, a.dose, a.reference);
    });
  }
  if (m == "psr") {
    return with_trimmed_scores(ds, a, [&](const ObservationalDataset& s, const PropensityFit& p) {
      return ate_psr(s, p, a.dose, a.reference);
    });
  }
  if (m == "stratify") {
    return with_trimmed_scores(ds, a, [](const ObservationalDataset& s, const PropensityFit& p) {
      return ate_stratification(s, p);
    });
  }
  if (m == "match") {
    return with_trimmed_scores(ds, a, [](const ObservationalDataset& s, const PropensityFit& p) {
      return ate_matching(s, p);
    });
  }
  if (m == "dr") {
    return with_trimmed_scores(ds, a, [&](const ObservationalDataset& s, const PropensityFit& p) {
      return ate_dr(s, OrSpec::all_covariates(s), p, a.dose, a.reference);
    });
  }
  if (m == "iv") {
    IvSpec spec;
    for (Index j = 0; j < ds.p(); ++j) spec.exogenous_covariates.push_back(j);
    return ate_2sls(ds, spec);
  }
  // Regression discontinuity: the running variable is stored as x.
  const RddSpec rdd{a.bandwidth};
  if (m == "rdd-sharp") return rdd_sharp(ds.y, ds.x.col(0), a.cutoff, rdd);
  if (m == "rdd-fuzzy") return rdd_fuzzy(ds.y, ds.x.col(0), ds.d, a.cutoff, rdd);
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + m + "'");
}

ObservationalDataset load_cross(const CsvTable& table, const EstimateArgs& a) {
  require_flag(a.outcome, "--outcome", a.method);
  RawColumns raw;
  raw.y = table.column(a.outcome);
  if (a.method == "rdd-sharp" || a.method == "rdd-fuzzy") {
    require_flag(a.running, "--running", a.method);
    const VectorXd t = table.column(a.running);
    raw.x = t;
    if (a.method == "rdd-fuzzy") {
      require_flag(a.treatment, "--treatment", a.method);
      raw.d = table.column(a.treatment);
    } else {
      raw.d = (t.array() >= a.cutoff).cast<double>().matrix();
    }
    return validate(std::move(raw));
  }
  require_flag(a.treatment, "--treatment", a.method);
  raw.d = table.column(a.treatment);
  raw.x = a.covariates.empty() ? MatrixXd(raw.y.size(), 0) : table.columns(a.covariates);
  if (a.method == "iv") {
    if (a.instruments.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--instruments is required for iv");
    }
    raw.z = table.columns(a.instruments);
  }
  return validate(std::move(raw));
}

PanelMethod parse_panel_method(const std::string& name) {
  for (PanelMethod m : {PanelMethod::kPOLS, PanelMethod::kRE, PanelMethod::kFE,
                        PanelMethod::kFD, PanelMethod::kCRE}) {
    std::string lower(panel_method_name(m));
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown panel method '" + name + "'");
}

std::vector<std::int64_t> integer_column(const CsvTable& table, const std::string& name) {
  const VectorXd v = table.column(name);
  std::vector<std::int64_t> out(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || v(i) != std::round(v(i))) {
      throw Error(ErrorCode::kParseError, "column '" + name + "' must hold integers");
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(v(i));
  }
  return out;
}

json estimate_to_json(const CausalEstimate& e, const std::optional<BootstrapResult>& boot,
                      int replicates) {
  json j;
  j["method"] = e.method;
  j["estimand"] = e.estimand == Estimand::kATE ? "ATE" : "APO";
  j["dose"] = e.dose;
  j["reference"] = e.reference;
  j["point"] = e.point;
  j["n_used"] = e.n_used;
  if (boot) {
    j["variance"] = boot->variance;
    j["ci"] = {boot->ci.first, boot->ci.second};
    j["variance_source"] = "bootstrap";
    j["bootstrap"] = {{"replicates", replicates}, {"failed", boot->failed}};
  } else if (e.variance) {
    j["variance"] = *e.variance;
    j["ci"] = {e.ci->first, e.ci->second};
    j["variance_source"] = "analytic";
  } else {
    j["variance"] = nullptr;
    j["ci"] = nullptr;
    j["variance_source"] = nullptr;
  }
  if (e.variance) j["analytic_variance"] = *e.variance;
  j["diagnostics"] = json::object();
  for (const auto& [k, v] : e.diagnostics) j["diagnostics"][k] = v;
  return j;
}

std::string json_to_markdown(const json& j) {
  std::ostringstream md;
  md << "| field | value |\n|---|---|\n";
  for (const char* key : {"method", "estimand", "point", "variance", "ci", "variance_source",
                          "n_used"}) {
    if (!j.contains(key)) continue;
    const auto& v = j[key];
    md << "| " << key << " | " << (v.is_string() ? v.get<std::string>() : v.dump()) << " |\n";
  }
  for (const auto& [k, v] : j["diagnostics"].items()) {
    md << "| " << k << " | " << v.dump() << " |\n";
  }
  return md.str();
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  if (a.trim.size() != 2) {
    throw Error(ErrorCode::kInvalidArgument, "--trim takes two values lo,hi");
  }
  if (a.bootstrap == 1 || a.bootstrap < 0) {
    throw Error(ErrorCode::kInvalidArgument, "--bootstrap needs at least 2 replicates");
  }
  const CsvTable table = CsvTable::read_file(a.data);
  CausalEstimate est;
  std::optional<BootstrapResult> boot;
  if (a.method == "panel") {
    require_flag(a.unit, "--unit", a.method);
    require_flag(a.time, "--time", a.method);
    require_flag(a.outcome, "--outcome", a.method);
    require_flag(a.treatment, "--treatment", a.method);
    const PanelDataset pds = validate_panel(
        integer_column(table, a.unit), integer_column(table, a.time), table.column(a.outcome),
        table.column(a.treatment),
        a.covariates.empty() ? MatrixXd(table.rows(), 0) : table.columns(a.covariates));
    PanelSpec spec;
    spec.method = parse_panel_method(a.panel_method);
    est = fit_panel(pds, spec);
    if (a.bootstrap >= 2) {
      boot = bootstrap_variance_panel(
          [&](const PanelDataset& p) { return fit_panel(p, spec).point; }, pds, a.bootstrap,
          a.seed, a.jobs);
    }
  } else {
    const ObservationalDataset ds = load_cross(table, a);
    est = estimate_cross(ds, a);
    if (a.bootstrap >= 2) {
      boot = bootstrap_variance(
          [&](const ObservationalDataset& s) { return estimate_cross(s, a).point; }, ds,
          a.bootstrap, a.seed, a.jobs);
    }
  }
  const json j = estimate_to_json(est, boot, a.bootstrap);
  if (a.format == "markdown") {
    out << json_to_markdown(j);
  } else {
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

// ---- simulate ----

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  f << text;
}

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "--param expects name=value, got '" + item + "'");
    }
    try {
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      out[item.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "bad value in --param '" + item + "'");
    }
  }
  return out;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  MonteCarloOptions o;
  o.case_id = parse_case(a.case_name);
  o.runs = a.runs;
  o.n = a.n;
  o.seed = a.seed;
  o.jobs = a.jobs;
  o.methods = a.methods;
  o.params = parse_params(a.params);
  if (!a.check.empty() && a.tol_file.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--check needs --tol-file");
  }

  json meta;
  std::optional<NoiseCalibration> calibration;
  if (o.case_id == CaseId::kCS1 && !o.params.count("x_var") && a.calibration_runs >= 2) {
    calibration = calibrate_cs1_noise_reading(a.calibration_runs, o.n, o.seed);
    if (calibration->chosen == "sd") {
      const double spread = default_params(CaseId::kCS1).at("x_var");
      o.params["x_var"] = spread * spread;
    }
    meta["calibration"] = {{"quantity", "x spread"},
                           {"chosen", calibration->chosen},
                           {"or2_mean_variance_reading", calibration->or2_variance},
                           {"or2_mean_sd_reading", calibration->or2_sd},
                           {"target", calibration->target},
                           {"runs", a.calibration_runs}};
  }

  const MonteCarloReport report = run_monte_carlo(o);

  std::filesystem::create_directories(a.out);
  const std::filesystem::path dir(a.out);
  std::string csv = "method,av_est,emp_var,mse\n";
  for (const auto& row : report.rows) {
    csv += row.method + "," + format_double(row.av_est) + "," + format_double(row.emp_var) +
           "," + format_double(row.mse) + "\n";
  }
  write_file(dir / "report.csv", csv);

  std::string runs = "run";
  for (const auto& row : report.rows) runs += "," + row.method;
  runs += "\n";
  for (Index r = 0; r < report.estimates.rows(); ++r) {
    runs += std::to_string(r);
    for (Index c = 0; c < report.estimates.cols(); ++c) {
      runs += "," + format_double(report.estimates(r, c));
    }
    runs += "\n";
  }
  write_file(dir / "runs.csv", runs);

  meta["case"] = std::string(case_name(report.case_id));
  meta["seed"] = report.seed;
  meta["runs"] = report.runs;
  meta["n"] = report.n;
  meta["true_effect"] = report.true_effect;
  meta["params"] = report.params;
  meta["failed_runs"] = json::object();
  for (const auto& row : report.rows) meta["failed_runs"][row.method] = row.failed;
  meta["normal_second_argument"] =
      calibration && calibration->chosen == "sd" ? "sd for x, variance elsewhere" : "variance";
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  out << csv;
  if (a.check.empty()) return kExitOk;

  const ReferenceVerdict verdict = compare_to_reference(
      report, read_reference_table(a.check), read_tolerances(a.tol_file));
  for (const auto& cell : verdict.cells) {
    out << (cell.pass ? "PASS " : "FAIL ") << cell.method << " " << cell.column << " "
        << format_double(cell.value) << " ref " << format_double(cell.reference);
    if (!cell.reason.empty()) out << " (" << cell.reason << ")";
    out << "\n";
  }
  return verdict.all_pass() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal effect estimation and Monte Carlo replication"};
  app.require_subcommand(1);

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate a treatment effect from a CSV file");
  est->add_option("--method", ea.method, "Estimator")
      ->required()
      ->check(CLI::IsMember({"dim", "or", "ipw", "psr", "stratify", "match", "dr", "iv",
                             "rdd-sharp", "rdd-fuzzy", "panel"}));
  est->add_option("--data", ea.data, "Input CSV with a header row")->required();
  est->add_option("--outcome", ea.outcome, "Outcome column");
  est->add_option("--treatment", ea.treatment, "Treatment column");
  est->add_option("--covariates", ea.covariates, "Covariate columns")->delimiter(',');
  est->add_option("--instruments", ea.instruments, "Instrument columns (iv)")->delimiter(',');
  est->add_option("--unit", ea.unit, "Unit id column (panel)");
  est->add_option("--time", ea.time, "Time column (panel)");
  est->add_option("--panel-method", ea.panel_method, "pols, re, fe, fd or cre")
      ->capture_default_str();
  est->add_option("--running", ea.running, "Running variable column (rdd)");
  est->add_option("--cutoff", ea.cutoff, "Threshold of the running variable")
      ->capture_default_str();
  est->add_option("--bandwidth", ea.bandwidth, "Keep |running - cutoff| <= h");
  est->add_option("--dose", ea.dose, "Treatment level")->capture_default_str();
  est->add_option("--reference", ea.reference, "Reference level")->capture_default_str();
  est->add_option("--bootstrap", ea.bootstrap, "Bootstrap replicates (0 = analytic only)")
      ->capture_default_str();
  est->add_option("--seed", ea.seed, "Bootstrap seed")->capture_default_str();
  est->add_option("--trim", ea.trim, "Propensity trimming bounds lo,hi")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  est->add_option("--format", ea.format, "json or markdown")
      ->check(CLI::IsMember({"json", "markdown"}))
      ->capture_default_str();
  est->add_option("--jobs", ea.jobs, "Worker threads (0 = default)");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a case-study Monte Carlo");
  sim->add_option("--case", sa.case_name, "cs1 ... cs6")->required();
  sim->add_option("--runs", sa.runs, "Monte Carlo runs")->capture_default_str();
  sim->add_option("--n", sa.n, "Sample size per run")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sim->add_option("--out", sa.out, "Output directory")->capture_default_str();
  sim->add_option("--jobs", sa.jobs, "Worker threads (0 = default)");
  sim->add_option("--methods", sa.methods, "Methods to run")->delimiter(',');
  sim->add_option("--param", sa.params, "Override a DGP parameter, name=value");
  sim->add_option("--check", sa.check, "Reference table to compare against");
  sim->add_option("--tol-file", sa.tol_file, "Tolerance JSON for --check");
  sim->add_option("--calibration-runs", sa.calibration_runs,
                  "Runs for the cs1 spread calibration (0 = skip)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*est) return cmd_estimate(ea, out);
    return cmd_simulate(sa, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_input_error() ? kExitInputError : kExitEstimationError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace causalkit
