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

#include "causalkit/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "causalkit/error.hpp"

namespace causalkit {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_cell(const std::string& raw, Eigen::Index row,
                  const std::string& col) {
  const std::string cell = trim(raw);
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double value = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::kParseError, "row " + std::to_string(row + 1) +
                                            ", column '" + col +
                                            "': not a number: '" + cell + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

CsvTable CsvTable::parse(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kEmptyDataset, "CSV input has no header row");
  }
  for (auto& name : split_csv_line(line)) t.header_.push_back(trim(name));
  t.data_.resize(t.header_.size());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header_.size()) {
      throw Error(ErrorCode::kParseError,
                  "row " + std::to_string(t.rows_ + 1) + " has " +
                      std::to_string(cells.size()) + " fields, header has " +
                      std::to_string(t.header_.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      t.data_[j].push_back(parse_cell(cells[j], t.rows_, t.header_[j]));
    }
    ++t.rows_;
  }
  return t;
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open '" + path + "'");
  return parse(in);
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header_.begin(), header_.end(), name) != header_.end();
}

Eigen::VectorXd CsvTable::column(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) {
    throw Error(ErrorCode::kUnknownColumn, "unknown column '" + name + "'");
  }
  const auto& col = data_[static_cast<std::size_t>(it - header_.begin())];
  return Eigen::Map<const Eigen::VectorXd>(col.data(),
                                           static_cast<Eigen::Index>(col.size()));
}

Eigen::MatrixXd CsvTable::columns(const std::vector<std::string>& names) const {
  Eigen::MatrixXd m(rows_, static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)) = column(names[j]);
  }
  return m;
}

}  // namespace causalkit
