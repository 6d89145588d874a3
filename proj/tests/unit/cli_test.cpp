// Copyright 2026 The kdbalance Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "kdb_tools/cli.hpp"

namespace kdb {
namespace {

namespace fs = std::filesystem;

const std::string kFixtures = KDB_FIXTURE_DIR;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kdb_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kStudy = kFixtures + "/small_study.csv";

TEST_F(CliTest, UsageErrors) {
  CliResult r = invoke({});
  EXPECT_EQ(r.code, cli::kUsage);
  r = invoke({"simulate", "--bogus", "1"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  r = invoke({"simulate", "--methods", "unad,kdps"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("--methods"), std::string::npos);
  r = invoke({"estimate", "--csv", kStudy, "--scheme", "magic"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("--scheme"), std::string::npos);
  EXPECT_EQ(invoke({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, WeightsFile) {
  const CliResult r = invoke({"weights", "--csv", kStudy, "--scheme", "kdbc", "--lambda", "2", "--out", path("w.csv")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const std::string w = slurp(path("w.csv"));
  EXPECT_EQ(count_lines(w), 41U);
  EXPECT_EQ(w.substr(0, w.find('\n')), "unit,group,weight,scheme,lambda");
  EXPECT_NE(w.find(",KDBC,2\n"), std::string::npos);
}

TEST_F(CliTest, EstimateAttAndReusedWeights) {
  CliResult r = invoke({"estimate", "--csv", kStudy, "--target", "att", "--scheme", "kdm1", "--out", path("rep.csv")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(r.out.substr(0, 3), "ATT");
  EXPECT_NE(r.out.find("ASMD[age] 0.00000"), std::string::npos);
  EXPECT_NE(slurp(path("rep.csv")).find("scheme,ATT_KDB"), std::string::npos);

  ASSERT_EQ(invoke({"weights", "--csv", kStudy, "--scheme", "kdm1", "--out", path("w.csv")}).code, cli::kOk);
  const CliResult direct = invoke({"estimate", "--csv", kStudy, "--scheme", "kdm1"});
  const CliResult reused = invoke({"estimate", "--csv", kStudy, "--weights", path("w.csv")});
  ASSERT_EQ(reused.code, cli::kOk) << reused.err;
  EXPECT_EQ(direct.out, reused.out);
}

TEST_F(CliTest, DataAndSolverExitCodes) {
  {
    std::ofstream f(path("one_group.csv"));
    f << "T,Y,X\n1,1,1\n1,2,2\n";
  }
  CliResult r = invoke({"estimate", "--csv", path("one_group.csv")});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("EmptyGroup"), std::string::npos);
  {
    std::ofstream f(path("hull.csv"));
    f << "T,Y,X\n1,1,5\n1,2,5.5\n0,0,0\n0,1,1\n0,2,2\n";
  }
  r = invoke({"estimate", "--csv", path("hull.csv"), "--target", "att", "--scheme", "kdm1"});
  EXPECT_EQ(r.code, cli::kSolverError);
  r = invoke({"estimate", "--csv", kFixtures + "/missing_cell.csv"});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("row 2, column X1"), std::string::npos);
}

TEST_F(CliTest, SimulateIsDeterministicAcrossJobs) {
  const std::vector<std::string> base{"simulate", "--design", "kang-schafer", "--n", "50", "--reps", "6",
                                      "--methods", "unad,ipw,kdbc,kdm1", "--seed", "7"};
  auto one = base;
  one.insert(one.end(), {"--jobs", "1", "--out", path("a.csv"), "--records", path("ra.csv")});
  auto many = base;
  many.insert(many.end(), {"--jobs", "4", "--out", path("b.csv"), "--records", path("rb.csv")});
  ASSERT_EQ(invoke(one).code, cli::kOk);
  ASSERT_EQ(invoke(many).code, cli::kOk);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("ra.csv")), slurp(path("rb.csv")));
  EXPECT_EQ(count_lines(slurp(path("ra.csv"))), 1U + 6U * 4U);
}

TEST_F(CliTest, ConfigPrecedence) {
  const std::string config = kFixtures + "/simulate.toml";
  struct Case {
    std::vector<std::string> args;
    std::size_t rows;
    std::string successes;
  };
  const std::vector<Case> cases{
      {{"simulate", "--n", "40", "--reps", "2"}, 4, ",2,0"},
      {{"--config", config, "simulate"}, 2, ",4,0"},
      {{"--config", config, "simulate", "--methods", "unad", "--reps", "3"}, 1, ",3,0"},
  };
  for (const auto& c : cases) {
    const CliResult r = invoke(c.args);
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(count_lines(r.out), c.rows + 1);
    const std::string first_row = r.out.substr(r.out.find('\n') + 1);
    EXPECT_NE(first_row.substr(0, first_row.find('\n')).rfind(c.successes), std::string::npos);
  }
}

TEST_F(CliTest, Sim2DesignEmitsHiddenColumns) {
  const CliResult r = invoke({"simulate", "--design", "sim2", "--n", "40", "--reps", "2", "--methods", "kdm1",
                     "--lambdas", "0,5"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("X5ASMD,X6ASMD"), std::string::npos);
  EXPECT_EQ(count_lines(r.out), 3U);
}

TEST_F(CliTest, BootstrapAndDiagnose) {
  CliResult r = invoke({"bootstrap", "--csv", kStudy, "-B", "5", "--methods", "unad,kdm1", "--seed", "3",
               "--out", path("boot.csv")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(count_lines(slurp(path("boot.csv"))), 3U);

  r = invoke({"diagnose", "--csv", kStudy, "--scheme", "kdbc", "--plot", "age", "--grid", "50", "--out-dir",
           path("plots")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  for (const char* suffix : {"_ecdf_treated.csv", "_ecdf_control.csv", "_density_treated.csv",
                             "_density_control.csv"}) {
    EXPECT_TRUE(fs::exists(path("plots") + "/age" + suffix)) << suffix;
  }
  EXPECT_EQ(count_lines(slurp(path("plots") + "/age_density_treated.csv")), 51U);
  r = invoke({"diagnose", "--csv", kStudy, "--plot", "income", "--out-dir", path("plots")});
  EXPECT_EQ(r.code, cli::kDataError);
}

}  // namespace
}  // namespace kdb
