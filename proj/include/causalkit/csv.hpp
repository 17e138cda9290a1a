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

#ifndef CAUSALKIT_CSV_HPP_
#define CAUSALKIT_CSV_HPP_

#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace causalkit {

// Numeric CSV with a header row. Column roles are chosen by the caller, so
// names carry no meaning here beyond lookup.
class CsvTable {
 public:
  static CsvTable parse(std::istream& in);
  static CsvTable read_file(const std::string& path);

  const std::vector<std::string>& header() const { return header_; }
  Eigen::Index rows() const { return rows_; }
  bool has_column(const std::string& name) const;

  // Throws Error(kUnknownColumn) for names not in the header.
  Eigen::VectorXd column(const std::string& name) const;
  Eigen::MatrixXd columns(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> data_;  // column-major
  Eigen::Index rows_ = 0;
};

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace causalkit

#endif  // CAUSALKIT_CSV_HPP_
