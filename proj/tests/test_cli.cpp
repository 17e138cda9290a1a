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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "causalkit/cli.hpp"
#include "causalkit/simulate.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace causalkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "causalkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("causalkit_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A case-one sample written as CSV with columns y,d,x1,x2.
fs::path sample_csv(const fs::path& dir) {
  DgpSpec spec;
  spec.n = 400;
  const auto ds = std::get<ObservationalDataset>(generate(spec, 0).data);
  const fs::path path = dir / "sample.csv";
  std::ofstream f(path);
  f.precision(17);
  f << "y,d,x1,x2\n";
  for (Index i = 0; i < ds.n(); ++i) {
    f << ds.y(i) << "," << ds.d(i) << "," << ds.x(i, 0) << "," << (i % 7) * 0.1 << "\n";
  }
  return path;
}

}  // namespace

TEST_CASE("estimate happy path") {
  const auto dir = scratch("estimate");
  const auto data = sample_csv(dir).string();
  const auto r = run({"estimate", "--method", "dr", "--data", data, "--outcome", "y",
                      "--treatment", "d", "--covariates", "x1,x2", "--bootstrap", "50",
                      "--jobs", "1"});
  REQUIRE(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["method"] == "dr");
  CHECK(doc["point"].get<double>() < 0.0);
  CHECK(doc["ci"].is_array());
  CHECK(doc["ci"][0].get<double>() < doc["ci"][1].get<double>());
  CHECK(doc["variance_source"] == "bootstrap");

  const auto md = run({"estimate", "--method", "or", "--data", data, "--outcome", "y",
                       "--treatment", "d", "--covariates", "x1", "--format", "markdown"});
  CHECK(md.code == kExitOk);
  CHECK(md.out.find("| point |") != std::string::npos);
}

TEST_CASE("estimate input errors") {
  const auto dir = scratch("errors");
  const auto data = sample_csv(dir).string();
  const auto missing = run({"estimate", "--method", "or", "--data", data, "--outcome", "y",
                            "--treatment", "nope"});
  CHECK(missing.code == kExitInputError);
  CHECK(missing.err.find("unknown column") != std::string::npos);

  CHECK(run({"estimate", "--method", "magic", "--data", data}).code == kExitInputError);
  CHECK(run({"estimate", "--method", "or", "--data", (dir / "absent.csv").string(),
             "--outcome", "y", "--treatment", "d"})
            .code == kExitInputError);
  CHECK(run({"frobnicate"}).code == kExitInputError);
}

TEST_CASE("estimation errors exit with their own code") {
  const auto dir = scratch("estimation");
  const fs::path path = dir / "flat.csv";
  {
    std::ofstream f(path);
    f << "y,d,z\n1,0,1\n2,1,1\n3,0,1\n4,1,1\n";
  }
  const auto r = run({"estimate", "--method", "iv", "--data", path.string(), "--outcome", "y",
                      "--treatment", "d", "--instruments", "z"});
  CHECK(r.code == kExitEstimationError);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("default trimming equals explicit bounds") {
  const auto dir = scratch("trim");
  const auto data = sample_csv(dir).string();
  const std::vector<std::string> base{"estimate", "--method", "ipw", "--data", data,
                                      "--outcome", "y", "--treatment", "d",
                                      "--covariates", "x1"};
  auto explicit_args = base;
  explicit_args.insert(explicit_args.end(), {"--trim", "0.01,0.99"});
  const auto a = run(base);
  const auto b = run(explicit_args);
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
}

TEST_CASE("simulate writes reproducible outputs") {
  const auto one = scratch("sim1");
  const auto two = scratch("sim2");
  const std::vector<std::string> args{"simulate", "--case", "cs5", "--runs", "20", "--n", "200"};
  auto first = args;
  first.insert(first.end(), {"--out", one.string(), "--jobs", "1"});
  auto second = args;
  second.insert(second.end(), {"--out", two.string(), "--jobs", "3"});
  REQUIRE(run(first).code == kExitOk);
  REQUIRE(run(second).code == kExitOk);
  CHECK(slurp(one / "runs.csv") == slurp(two / "runs.csv"));
  CHECK(slurp(one / "report.csv") == slurp(two / "report.csv"));
  const std::string report = slurp(one / "report.csv");
  CHECK(report.rfind("method,av_est,emp_var,mse\n", 0) == 0);
  const auto meta = nlohmann::json::parse(slurp(one / "meta.json"));
  CHECK(meta["seed"] == 42);
  CHECK(meta["case"] == "cs5");
  CHECK(meta["params"].contains("tau"));

  CHECK(run({"simulate", "--case", "cs9", "--out", one.string()}).code == kExitInputError);
  CHECK(run({"simulate", "--case", "cs5", "--runs", "2", "--param", "tau", "--out",
             one.string()})
            .code == kExitInputError);
}

TEST_CASE("simulate default case one has seven rows and calibration metadata") {
  const auto dir = scratch("cs1");
  const auto r = run({"simulate", "--case", "cs1", "--runs", "3", "--n", "200",
                      "--calibration-runs", "3", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  std::istringstream report(slurp(dir / "report.csv"));
  CHECK(parse_reference_table(report).size() == 7);
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  CHECK(meta.contains("calibration"));
}

TEST_CASE("simulate check gate") {
  const auto dir = scratch("check");
  {
    std::ofstream ref(dir / "ref.csv");
    ref << "method,av_est,emp_var,mse\nDID1,-4.0,0.008,0.008\nDID2,-5.0,0.01,1.0\n";
    std::ofstream loose(dir / "loose.json");
    loose << R"({"DID1": {"av_est": {"abs": 0.3}}, "DID2": {"av_est": {"abs": 0.5}}})";
    std::ofstream strict(dir / "strict.json");
    strict << R"({"DID1": {"av_est": {"abs": 1e-9}}})";
  }
  const std::vector<std::string> args{"simulate", "--case", "cs5", "--runs", "20", "--n", "300",
                                      "--out", (dir / "out").string(), "--check",
                                      (dir / "ref.csv").string(), "--tol-file"};
  auto pass = args;
  pass.push_back((dir / "loose.json").string());
  const auto ok = run(pass);
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("PASS DID1 av_est") != std::string::npos);
  auto fail = args;
  fail.push_back((dir / "strict.json").string());
  const auto bad = run(fail);
  CHECK(bad.code == kExitCheckFailed);
  CHECK(bad.out.find("FAIL DID1 av_est") != std::string::npos);
}

TEST_CASE("shipped reference tables parse") {
  for (int k = 2; k <= 7; ++k) {
    const std::string path =
        std::string(CAUSALKIT_REFERENCE_DIR) + "/table" + std::to_string(k) + ".csv";
    CAPTURE(path);
    CHECK_FALSE(read_reference_table(path).empty());
    const std::string tol =
        std::string(CAUSALKIT_REFERENCE_DIR) + "/table" + std::to_string(k) + ".tol.json";
    CHECK_NOTHROW(read_tolerances(tol));
  }
}
