#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "normreg/io.hpp"
#include "normreg/version.hpp"

#ifndef NORMREG_CLI_PATH
#error "NORMREG_CLI_PATH must point at the normreg executable"
#endif

namespace fs = std::filesystem;
using normreg::io::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("normreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  Outcome run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(NORMREG_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  void write(const std::string& name, const std::string& content) const { std::ofstream(path(name)) << content; }

  // 40 rows: a binary column, a continuous column and y.
  std::string toy() const {
    std::string s = "x1,x2,y\n";
    for (int i = 0; i < 40; ++i) {
      const int b = i % 4 == 0 ? 1 : 0;
      const double c = std::sin(1.7 * i);
      const double y = 1.5 * b + 0.8 * c + 0.3 * std::cos(2.3 * i);
      s += std::to_string(b) + "," + normreg::io::detail::format_number(c) + "," +
           normreg::io::detail::format_number(y) + "\n";
    }
    write("toy.csv", s);
    return path("toy.csv").string();
  }

  json manifest(const std::string& csv) const { return json::parse(slurp(csv + ".manifest.json")); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndVersion) {
  const auto h = run("--help");
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("simulate"), std::string::npos);
  EXPECT_NE(h.out.find("Exit status"), std::string::npos);
  EXPECT_EQ(run("--version").code, 0);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(Cli, SimulateIsByteIdentical) {
  const auto a = path("sel_a.csv").string(), b = path("sel_b.csv").string();
  ASSERT_EQ(run("simulate --scenario selection-probability --seed 7 --out " + a).code, 0);
  ASSERT_EQ(run("simulate --scenario selection-probability --seed 7 --out " + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a + ".manifest.json"), slurp(b + ".manifest.json"));
  const json m = manifest(a);
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["scenario"], "selection-probability");
  EXPECT_EQ(m["parameters"]["replications"], 100);
  EXPECT_EQ(m["version"], normreg::kVersion);
}

TEST_F(Cli, SimulateOverridesAndConfig) {
  write("cfg.txt", "replications = 3\nq = 0.5, 0.7\n");
  const auto out = path("s.csv").string();
  ASSERT_EQ(run("simulate --scenario 1 --config " + path("cfg.txt").string() + " --set replications=2 --out " + out)
                .code,
            0);
  const json m = manifest(out);
  EXPECT_EQ(m["parameters"]["replications"], 2);
  const auto t = normreg::io::read_table(out);
  EXPECT_EQ(t.rows.size(), 2u * 2u * 4u);

  const auto bad = path("bad.csv").string();
  const auto r = run("simulate --scenario 1 --set lambda=3 --out " + bad);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("lambda"), std::string::npos);
  EXPECT_FALSE(fs::exists(bad));
  EXPECT_EQ(run("simulate --scenario nope --out " + bad).code, 1);
  EXPECT_EQ(run("simulate --scenario 1 --set oops --out " + bad).code, 1);
  EXPECT_FALSE(fs::exists(bad));
}

TEST_F(Cli, SimulateSummaryAsJson) {
  const auto out = path("s.json").string();
  ASSERT_EQ(run("simulate --scenario 1 --set replications=5 --summary --out " + out).code, 0);
  const json j = json::parse(slurp(out));
  EXPECT_EQ(j["manifest"]["output"], "summary");
  ASSERT_EQ(j["records"].size(), 20u);
  EXPECT_TRUE(j["records"][0].contains("reference_mean"));
}

TEST_F(Cli, FitAboveLambdaMaxHasEmptySupport) {
  const auto data = toy();
  const auto first = path("f1.csv").string();
  ASSERT_EQ(run("fit --input " + data + " --response y --normalize binary-delta --delta 1 --lambda1 0.01 --out " + first)
                .code,
            0);
  const double lmax = manifest(first)["lambda_max"];
  EXPECT_EQ(manifest(first)["support_size"], 2);
  const auto second = path("f2.csv").string();
  const auto r = run("fit --input " + data + " --response y --normalize binary-delta --delta 1 --lambda1 " +
                     normreg::io::detail::format_number(1.1 * lmax) + " --out " + second);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("support: 0 of 2"), std::string::npos);
  const json m = manifest(second);
  EXPECT_EQ(m["support_size"], 0);
  EXPECT_TRUE(m["support"].empty());
  const auto t = normreg::io::read_table(second);
  const std::size_t col = t.column_index("beta");
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_EQ(std::get<double>(t.rows[i][col]), 0.0);
}

TEST_F(Cli, FitAlphaLambdaParameterization) {
  const auto data = toy();
  const auto a = path("a.csv").string(), b = path("b.csv").string();
  ASSERT_EQ(run("fit --input " + data + " --alpha 0.25 --lambda 2 --out " + a).code, 0);
  ASSERT_EQ(run("fit --input " + data + " --lambda1 0.5 --lambda2 1.5 --out " + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const json m = manifest(a);
  EXPECT_EQ(m["lambda1"], 0.5);
  EXPECT_EQ(m["lambda2"], 1.5);
  EXPECT_EQ(m["alpha"], 0.25);
  EXPECT_EQ(m["lambda"], 2.0);
}

TEST_F(Cli, UsageErrorsWriteNothing) {
  const auto data = toy();
  const auto out = path("never.csv").string();
  for (const std::string args : {
           "fit --input " + data + " --lambda1 1 --alpha 0.5 --lambda 1 --out " + out,
           "fit --input " + data + " --alpha 0.5 --out " + out,
           "fit --input " + data + " --out " + out,
           "fit --input " + data + " --lambda1 -1 --out " + out,
           "fit --input " + data + " --lambda1 1 --delta 1 --out " + out,
           "fit --input " + data + " --lambda1 1 --normalize bogus --out " + out,
           "fit --input " + data + " --lambda1 1 --kind x1=maybe --out " + out,
           "fit --lambda1 1 --out " + out,
           "oracle --curve noiseless --q-grid 0.5:0.9 --out " + out,
           "oracle --curve selection --delta 1 --omega 1 --out " + out,
           "oracle --curve selection --lambda1 0 --out " + out,
       }) {
    const auto r = run(args);
    EXPECT_EQ(r.code, 1) << args;
    EXPECT_NE(r.err.find("error"), std::string::npos) << args;
    EXPECT_FALSE(fs::exists(out)) << args;
    EXPECT_FALSE(fs::exists(out + ".manifest.json")) << args;
  }
}

TEST_F(Cli, DataErrorsNameFileAndLine) {
  write("ragged.csv", "a,b,y\n1,2,3\n4,5\n");
  const auto out = path("never.csv").string();
  const auto r = run("fit --input " + path("ragged.csv").string() + " --lambda1 1 --out " + out);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ragged.csv"), std::string::npos);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
  const auto missing = run("normalize --input " + path("absent.csv").string());
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("absent.csv"), std::string::npos);
  write("const.csv", "a,b,y\n1,0,1\n1,1,2\n1,0,3\n");
  EXPECT_EQ(run("fit --input " + path("const.csv").string() + " --lambda1 1").code, 2);
}

TEST_F(Cli, StrictNonConvergence) {
  const auto data = toy();
  const auto out = path("nc.csv").string();
  const auto strict = run("fit --input " + data + " --lambda1 0.01 --max-sweeps 1 --strict --out " + out);
  EXPECT_EQ(strict.code, 3);
  EXPECT_NE(strict.err.find("sweeps"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
  const auto lax = run("fit --input " + data + " --lambda1 0.01 --max-sweeps 1 --out " + out);
  EXPECT_EQ(lax.code, 0);
  EXPECT_NE(lax.err.find("warning"), std::string::npos);
  EXPECT_EQ(manifest(out)["converged"], false);
}

TEST_F(Cli, OracleNoiselessIsFlat) {
  const auto out = path("nl.csv").string();
  ASSERT_EQ(run("oracle --curve noiseless --delta 1 --beta 1 --n 100 --lambda1 10 --q-grid 0.5:0.99:50 --out " + out)
                .code,
            0);
  const auto t = normreg::io::read_table(out);
  ASSERT_EQ(t.rows.size(), 50u);
  for (const auto& row : t.rows) EXPECT_NEAR(std::get<double>(row[2]), 0.9, 1e-12);
  EXPECT_EQ(manifest(out)["curve"], "noiseless");
}

TEST_F(Cli, OracleOtherCurves) {
  const auto sel = run("oracle --curve selection --lambda1 10 --q-grid 0.5,0.9 --delta 0,1 --format json");
  ASSERT_EQ(sel.code, 0) << sel.err;
  const json j = json::parse(sel.out);
  ASSERT_EQ(j["records"].size(), 4u);
  for (const auto& r : j["records"]) EXPECT_TRUE(r["value"] >= 0.0 && r["value"] <= 1.0);
  const auto lim = run("oracle --curve limits --lambda1 5 --lambda2 10 --delta 0.25,0.5,1");
  ASSERT_EQ(lim.code, 0) << lim.err;
  EXPECT_NE(lim.out.find("delta,mean_limit,variance_limit,selection_limit"), std::string::npos);
  EXPECT_NE(lim.out.find("inf"), std::string::npos);
  EXPECT_NE(lim.err.find("\"curve\""), std::string::npos);
  const auto g = run("oracle --curve gumbel --n-grid 10,1000");
  ASSERT_EQ(g.code, 0);
  EXPECT_NE(g.out.find("n,a_n,b_n,mean_approx"), std::string::npos);
}

TEST_F(Cli, NormalizePrintsPlan) {
  const auto data = toy();
  const auto r = run("normalize --input " + data + " --normalize binary-delta --delta 0.5 --penalty-kind plain");
  ASSERT_EQ(r.code, 0) << r.err;
  // x1 has q = 0.25; unanchored delta = 1/2 scales by the standard deviation.
  EXPECT_NE(r.out.find("x1,binary,0.25,0.25," + normreg::io::detail::format_number(std::sqrt(0.1875))),
            std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("x2,continuous,,"), std::string::npos);
}

TEST_F(Cli, PathAndCrossValidation) {
  const auto data = toy();
  const auto p = path("path.csv").string();
  ASSERT_EQ(run("path --input " + data + " --count 12 --out " + p).code, 0);
  const auto t = normreg::io::read_table(p);
  EXPECT_EQ(t.rows.size(), 12u * 3u);
  EXPECT_EQ(std::get<double>(t.rows[0][t.column_index("df")]), 0.0);
  EXPECT_GT(std::get<double>(t.rows.back()[t.column_index("df")]), 0.0);

  const auto cv = path("cv.csv").string();
  const auto r = run("cv --input " + data + " --folds 4 --repeats 2 --count 10 --deltas 0,1 --strategy maxabs --out " +
                     cv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(normreg::io::read_table(cv).rows.size(), 3u * 10u);
  const json m = manifest(cv);
  EXPECT_EQ(m["normalizations"].size(), 3u);
  EXPECT_LT(m["best_mean_nmse"].get<double>(), 1.0);
  const auto again = path("cv2.csv").string();
  ASSERT_EQ(run("cv --input " + data + " --folds 4 --repeats 2 --count 10 --deltas 0,1 --strategy maxabs --out " +
                again)
                .code,
            0);
  EXPECT_EQ(slurp(cv), slurp(again));
}
