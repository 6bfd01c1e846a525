#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shapefit/io.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("shapefit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the binary with `args`, capturing stdout and stderr; returns the exit code.
  int run(const std::string& args) {
    const std::string cmd = std::string(SHAPEFIT_CLI) + " " + args + " >" + (dir_ / "stdout").string() + " 2>" +
                            (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    out_ = slurp(dir_ / "stdout");
    err_ = slurp(dir_ / "stderr");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  fs::path dir_;
  std::string out_;
  std::string err_;
};

TEST_F(Cli, GenerateIsDeterministic) {
  const std::string flags = " generate --n 15 --d 3 --p 0.6 --q 0.2 --sigma 0.01";
  ASSERT_EQ(run("--seed 9 --out " + path("a.txt") + flags), 0) << err_;
  EXPECT_NE(out_.find("bad="), std::string::npos);
  ASSERT_EQ(run("--seed 9 --out " + path("b.txt") + flags), 0) << err_;
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  ASSERT_EQ(run("--seed 10 --out " + path("c.txt") + flags), 0);
  EXPECT_NE(slurp(path("a.txt")), slurp(path("c.txt")));
}

TEST_F(Cli, GenerateTwoPointsAndAllBad) {
  ASSERT_EQ(run("--seed 1 --out " + path("two.txt") + " generate --n 2 --d 2 --p 1 --q 0 --sigma 0"), 0) << err_;
  const shapefit::Instance two = shapefit::load_instance(path("two.txt"));
  ASSERT_EQ(two.observations.edge_count(), 1);
  EXPECT_EQ(two.observations.bad_count(), 0);
  const shapefit::Vector exact = two.locations->difference(0, 1).normalized();
  EXPECT_LE((two.observations.direction(0) - exact).norm(), 1e-15);

  ASSERT_EQ(run("--seed 1 --out " + path("bad.txt") + " generate --n 8 --d 3 --p 1 --q 1"), 0) << err_;
  const shapefit::Instance bad = shapefit::load_instance(path("bad.txt"));
  EXPECT_EQ(bad.observations.bad_count(), bad.observations.edge_count());
}

TEST_F(Cli, SolveAnalyticAndExactInstances) {
  write("edge.txt", "shapefit-v1 2 2 1\n0 1 1 0\n");
  ASSERT_EQ(run("--out " + path("edge.json") + " solve " + path("edge.txt")), 0) << err_;
  const auto j = nlohmann::json::parse(slurp(path("edge.json")));
  EXPECT_EQ(j["status"], "converged");
  EXPECT_LE(j["objective"].get<double>(), 1e-9);
  EXPECT_NE(out_.find("objective="), std::string::npos);

  ASSERT_EQ(run("--seed 3 --out " + path("q0.txt") + " generate --n 20 --d 3 --p 0.5 --q 0"), 0);
  ASSERT_EQ(run("solve " + path("q0.txt")), 0) << err_;
  const auto k = nlohmann::json::parse(out_);
  EXPECT_LE(k["relative_error"].get<double>(), 1e-5);
}

TEST_F(Cli, ExitCodes) {
  write("nonunit.txt", "shapefit-v1 3 2 2\n0 1 1 0\n1 2 0 0.5\n");
  EXPECT_EQ(run("solve " + path("nonunit.txt")), 2);
  EXPECT_NE(err_.find("(1, 2)"), std::string::npos) << err_;

  write("split.txt", "shapefit-v1 4 2 2\n0 1 1 0\n2 3 0 1\n");
  EXPECT_EQ(run("solve " + path("split.txt")), 3);
  EXPECT_NE(err_.find("disconnected"), std::string::npos) << err_;

  EXPECT_EQ(run("solve " + path("missing.txt")), 4);
  EXPECT_EQ(run("generate --n 5 --p 2"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("--seed 1 --out /nonexistent/dir/x.txt generate --n 5"), 4);
}

TEST_F(Cli, CheckReportsAndIsDeterministic) {
  ASSERT_EQ(run("--seed 4 --out " + path("i.txt") + " generate --n 30 --d 3 --p 0.7 --q 0"), 0);
  ASSERT_EQ(run("check --format json " + path("i.txt")), 0) << err_;
  const auto j = nlohmann::json::parse(out_);
  EXPECT_EQ(j["epsilon"].get<double>(), 0.0);
  EXPECT_EQ(j["epsilon0"].get<double>(), 0.0);
  const std::string first = out_;
  ASSERT_EQ(run("check --format json " + path("i.txt")), 0);
  EXPECT_EQ(out_, first);

  ASSERT_EQ(run("--out " + path("r.json") + " check --theorem 3d --beta 0.1 " + path("i.txt")), 0) << err_;
  EXPECT_TRUE(fs::exists(path("r.json")));
  EXPECT_TRUE(fs::exists(path("r.txt")));

  ASSERT_EQ(run("--seed 4 --out " + path("d4.txt") + " generate --n 10 --d 4 --p 1 --q 0"), 0);
  EXPECT_EQ(run("check --theorem 3d " + path("d4.txt")), 2);
}

TEST_F(Cli, CheckFlagsCollinearTriple) {
  // Exact observations of a cloud with three points on a line.
  std::ostringstream inst;
  inst << "shapefit-v1 4 3 6\n";
  const double pts[4][3] = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 1}};
  for (int i = 0; i < 4; ++i) inst << i << ' ' << pts[i][0] << ' ' << pts[i][1] << ' ' << pts[i][2] << '\n';
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      double v[3], len = 0;
      for (int a = 0; a < 3; ++a) len += (v[a] = pts[i][a] - pts[j][a]) * v[a];
      len = std::sqrt(len);
      inst << i << ' ' << j << ' ' << shapefit::format_real(v[0] / len) << ' ' << shapefit::format_real(v[1] / len)
           << ' ' << shapefit::format_real(v[2] / len) << " g\n";
    }
  }
  write("line.txt", inst.str());
  ASSERT_EQ(run("check --format json --p 1 " + path("line.txt")), 0) << err_;
  const auto j = nlohmann::json::parse(out_);
  EXPECT_EQ(j["beta"].get<double>(), 0.0);
  EXPECT_FALSE(j["passes"].get<bool>());
}

TEST_F(Cli, ExperimentWritesOutputs) {
  const std::string out = path("grid");
  ASSERT_EQ(run("--seed 2 --jobs 2 --out " + out +
                " experiment phase-grid --n-values 8,12 --q-values 0,0.2 --trials 2 --p 0.8"),
            0)
      << err_;
  for (const char* f : {"phase-grid.csv", "phase-grid.svg", "phase-grid.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  }
  const std::string csv = slurp(fs::path(out) / "phase-grid.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 2 * 2);

  // Rerunning from the embedded config reproduces the CSV byte for byte.
  const auto manifest = nlohmann::json::parse(slurp(fs::path(out) / "phase-grid.json"));
  write("cfg.json", manifest.at("config").dump());
  const std::string again = path("again");
  ASSERT_EQ(run("--config " + path("cfg.json") + " --out " + again + " experiment phase-grid"), 0) << err_;
  EXPECT_EQ(slurp(fs::path(again) / "phase-grid.csv"), csv);

  write("typo.json", "{\"trails\": 3}");
  EXPECT_EQ(run("--config " + path("typo.json") + " --out " + again + " experiment phase-grid"), 2);
}

}  // namespace
