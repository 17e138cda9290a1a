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
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "causalkit/csv.hpp"
#include "causalkit/simulate.hpp"
#include "json.hpp"

namespace causalkit {

namespace {

const char* const kColumns[] = {"av_est", "emp_var", "mse"};

double parse_number(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line) + ": '" + cell + "' is not a number");
  }
  return v;
}

double report_value(const MethodSummary& row, const std::string& column) {
  if (column == "av_est") return row.av_est;
  if (column == "emp_var") return row.emp_var;
  return row.mse;
}

double reference_value(const ReferenceRow& row, const std::string& column) {
  if (column == "av_est") return row.av_est;
  if (column == "emp_var") return row.emp_var;
  return row.mse;
}

}  // namespace

std::vector<ReferenceRow> parse_reference_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, "empty reference table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"method", "av_est", "emp_var", "mse"}) {
    throw Error(ErrorCode::kParseError,
                "reference header must be method,av_est,emp_var,mse");
  }
  std::vector<ReferenceRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(number) + ": expected 4 cells");
    }
    rows.push_back({cells[0], parse_number(cells[1], number), parse_number(cells[2], number),
                    parse_number(cells[3], number)});
  }
  return rows;
}

std::vector<ReferenceRow> read_reference_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  return parse_reference_table(in);
}

bool CellTolerance::bounded() const {
  return std::isfinite(min) || std::isfinite(max);
}

ToleranceTable parse_tolerances(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("tolerance file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "tolerance file must be an object");
  ToleranceTable table;
  for (const auto& [method, columns] : doc.items()) {
    if (!columns.is_object()) {
      throw Error(ErrorCode::kParseError, "tolerances for '" + method + "' must be an object");
    }
    for (const auto& [column, spec] : columns.items()) {
      if (column != "av_est" && column != "emp_var" && column != "mse") {
        throw Error(ErrorCode::kParseError, "unknown column '" + column + "'");
      }
      CellTolerance t;
      t.abs = spec.value("abs", -1.0);
      t.rel = spec.value("rel", -1.0);
      t.min = spec.value("min", -std::numeric_limits<double>::infinity());
      t.max = spec.value("max", std::numeric_limits<double>::infinity());
      table[method][column] = t;
    }
  }
  return table;
}

ToleranceTable read_tolerances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_tolerances(buf.str());
}

bool ReferenceVerdict::all_pass() const {
  for (const auto& c : cells) {
    if (!c.pass) return false;
  }
  return true;
}

ReferenceVerdict compare_to_reference(const MonteCarloReport& report,
                                      const std::vector<ReferenceRow>& reference,
                                      const ToleranceTable& tolerances) {
  ReferenceVerdict verdict;
  for (const auto& row : report.rows) {
    const auto ref = std::find_if(reference.begin(), reference.end(),
                                  [&](const ReferenceRow& r) { return r.method == row.method; });
    if (ref == reference.end()) {
      throw Error(ErrorCode::kMissingReferenceCell,
                  "reference table has no row for " + row.method);
    }
    for (const char* column : kColumns) {
      const CellTolerance* tol = nullptr;
      for (const std::string& key : {row.method, std::string("*")}) {
        const auto m = tolerances.find(key);
        if (m == tolerances.end()) continue;
        const auto c = m->second.find(column);
        if (c != m->second.end()) {
          tol = &c->second;
          break;
        }
      }
      if (tol == nullptr) continue;
      CellVerdict cell;
      cell.method = row.method;
      cell.column = column;
      cell.value = report_value(row, column);
      cell.reference = reference_value(*ref, column);
      cell.pass = true;
      const double diff = std::abs(cell.value - cell.reference);
      if (tol->compare_to_reference()) {
        const bool abs_ok = tol->abs >= 0.0 && diff <= tol->abs;
        const bool rel_ok = tol->rel >= 0.0 && diff <= tol->rel * std::abs(cell.reference);
        if (!abs_ok && !rel_ok) {
          cell.pass = false;
          cell.reason = "differs from reference by " + std::to_string(diff);
        }
      }
      if (cell.value < tol->min || cell.value > tol->max) {
        cell.pass = false;
        cell.reason += (cell.reason.empty() ? "" : "; ") + std::string("outside bounds");
      }
      verdict.cells.push_back(std::move(cell));
    }
    CellVerdict identity;
    identity.method = row.method;
    identity.column = "mse_identity";
    identity.value = row.mse;
    identity.reference = row.emp_var + row.bias * row.bias;
    const double gap = std::abs(identity.value - identity.reference);
    identity.pass = gap <= kMseIdentityTolerance &&
                    std::abs(row.bias - (row.av_est - report.true_effect)) <=
                        kMseIdentityTolerance;
    if (!identity.pass) identity.reason = "mse != emp_var + bias^2";
    verdict.cells.push_back(std::move(identity));
  }
  return verdict;
}

}  // namespace causalkit
