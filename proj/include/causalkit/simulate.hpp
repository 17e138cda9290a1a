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

#ifndef CAUSALKIT_SIMULATE_HPP_
#define CAUSALKIT_SIMULATE_HPP_

#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "causalkit/core.hpp"
#include "causalkit/quasi.hpp"

namespace causalkit {

enum class CaseId { kCS1 = 1, kCS2, kCS3, kCS4, kCS5, kCS6 };

std::string_view case_name(CaseId id);  // "cs1" ... "cs6"
CaseId parse_case(std::string_view name);  // throws UnknownCase

using ParamMap = std::map<std::string, double>;

// Parameter names and defaults per case; see README for the meaning of each.
ParamMap default_params(CaseId id);

struct DgpSpec {
  CaseId case_id = CaseId::kCS1;
  Index n = 1000;  // rows (panel: units x periods; DID: units)
  std::uint64_t seed = 42;
  ParamMap params;      // overrides on top of default_params
  std::string variant;  // empty = the case's baseline design
};

using Sample = std::variant<ObservationalDataset, PanelDataset, DidDataset>;

struct Draw {
  Sample data;
  std::map<std::string, VectorXd> aux;  // e.g. true and misspecified scores
};

// One dataset from the case DGP; every variable reads its own stream keyed
// by (seed, case, run, variable).
Draw generate(const DgpSpec& spec, std::uint64_t run_index);

// Variants accepted by generate for a case; the first is the baseline.
std::vector<std::string> case_variants(CaseId id);

struct MethodDef {
  std::string name;
  std::string variant;  // dataset variant the method is evaluated on
  std::function<double(const Draw&)> estimate;
};

// Every method known for a case; `defaults` lists the table rows.
std::vector<MethodDef> case_methods(CaseId id);
std::vector<std::string> default_methods(CaseId id);

struct MethodSummary {
  std::string method;
  double av_est = 0.0;
  double emp_var = 0.0;  // divisor R_ok - 1
  double mse = 0.0;      // emp_var + bias^2
  double bias = 0.0;
  int failed = 0;
};

struct MonteCarloOptions {
  CaseId case_id = CaseId::kCS1;
  std::vector<std::string> methods;  // empty = default_methods
  int runs = 1000;
  Index n = 1000;
  std::uint64_t seed = 42;
  int jobs = 0;  // <= 0: OpenMP default
  ParamMap params;
};

struct MonteCarloReport {
  CaseId case_id = CaseId::kCS1;
  int runs = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  double true_effect = 0.0;
  ParamMap params;  // resolved parameters
  std::vector<MethodSummary> rows;
  MatrixXd estimates;  // runs x methods, NaN where a run failed
};

inline constexpr double kMaxFailedRunShare = 0.05;

MonteCarloReport run_monte_carlo(const MonteCarloOptions& options);
// Single-threaded reference; bit-identical to run_monte_carlo.
MonteCarloReport run_monte_carlo_serial(const MonteCarloOptions& options);

// Builds the report rows from a runs x methods estimate matrix.
std::vector<MethodSummary> summarize(const std::vector<std::string>& methods,
                                     const MatrixXd& estimates, double true_effect);

// Pairwise (cascade) sum; the order of additions depends only on the length.
double pairwise_sum(const double* v, std::size_t n);

struct NoiseCalibration {
  std::string chosen;      // "variance" or "sd"
  double or2_variance = 0.0;  // mean OR2 with the second argument as a variance
  double or2_sd = 0.0;        // ... as a standard deviation
  double target = 0.0;
};

// Runs OR2 for case 1 under both readings of the covariate spread and keeps
// the one whose mean is nearer `target`.
NoiseCalibration calibrate_cs1_noise_reading(int runs, Index n, std::uint64_t seed,
                                             double target = -3.149);

// ---- Reference tables ----

struct ReferenceRow {
  std::string method;
  double av_est = 0.0;
  double emp_var = 0.0;
  double mse = 0.0;
};

std::vector<ReferenceRow> read_reference_table(const std::string& path);
std::vector<ReferenceRow> parse_reference_table(std::istream& in);

struct CellTolerance {
  double abs = -1.0;  // negative = unused
  double rel = -1.0;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  bool compare_to_reference() const { return abs >= 0.0 || rel >= 0.0; }
  bool bounded() const;
};

// Tolerances by method and column ("av_est", "emp_var", "mse"); the
// "*" method supplies defaults.
using ToleranceTable = std::map<std::string, std::map<std::string, CellTolerance>>;

ToleranceTable parse_tolerances(const std::string& json_text);
ToleranceTable read_tolerances(const std::string& path);

struct CellVerdict {
  std::string method;
  std::string column;  // av_est, emp_var, mse or mse_identity
  double value = 0.0;
  double reference = 0.0;
  bool pass = false;
  std::string reason;
};

struct ReferenceVerdict {
  std::vector<CellVerdict> cells;
  bool all_pass() const;
};

inline constexpr double kMseIdentityTolerance = 1e-9;

// Compares every report row with its reference row; cells without a
// tolerance are skipped. Also checks mse = emp_var + bias^2.
ReferenceVerdict compare_to_reference(const MonteCarloReport& report,
                                      const std::vector<ReferenceRow>& reference,
                                      const ToleranceTable& tolerances);

}  // namespace causalkit

#endif  // CAUSALKIT_SIMULATE_HPP_
