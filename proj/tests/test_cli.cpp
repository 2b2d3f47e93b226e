#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "ultrafield/cli.hpp"

namespace ultrafield {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string t2_path() { return testing::data_path("T2.json"); }

TEST(Cli, ValidateT2) {
  const auto r = run_cli({"validate", t2_path()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"leaves\": 4"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"total_measure\": 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\"has_symbol\": true"), std::string::npos) << r.out;
}

TEST(Cli, VerifyEigenT2) {
  const auto r = run_cli({"verify", "eigen", t2_path(), "--tol", "1e-9"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"pass\": true"), std::string::npos);
  EXPECT_EQ(r.err, "pass\n");
}

TEST(Cli, VerifySubcommandsPassOnT2) {
  for (const char* check : {"eigen", "kernel", "ortho", "markov", "equation"}) {
    const auto r = run_cli({"verify", check, t2_path(), "--quiet"});
    EXPECT_EQ(r.code, 0) << check << ": " << r.out << r.err;
    EXPECT_TRUE(r.err.empty());
  }
}

TEST(Cli, VerificationFailureExitsOne) {
  // A residual tolerance below zero residual's rounding cannot be met on a generated tree.
  const auto r = run_cli({"verify", "eigen", "--gen", "3:4:1", "--t-root", "1", "--t-ratio", "3", "--tol", "1e-300"});
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_EQ(r.err, "FAIL\n");
}

TEST(Cli, InputErrors) {
  EXPECT_EQ(run_cli({"spectrum", "missing.json"}).code, 2);
  const auto bad = run_cli({"spectrum", t2_path(), "--bogus"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("--bogus"), std::string::npos) << bad.err;
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"spectrum", "--gen", "2:x:1"}).code, 2);
  EXPECT_EQ(run_cli({"mc-cov", t2_path()}).code, 2);
  EXPECT_EQ(run_cli({"verify", "eigen", t2_path(), "--tol", "-1"}).code, 2);
}

TEST(Cli, MissingSymbolIsInputError) {
  const auto path = std::filesystem::temp_directory_path() / "ultrafield_nosym.json";
  std::ofstream(path) << R"({"nodes":[{"id":"R","children":["x","y"]},{"id":"x","measure":1},{"id":"y","measure":1}]})";
  EXPECT_EQ(run_cli({"validate", path.string()}).code, 0);
  const auto r = run_cli({"spectrum", path.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("MissingSymbol"), std::string::npos) << r.err;
  std::filesystem::remove(path);
}

TEST(Cli, SpectrumCsv) {
  const auto r = run_cli({"spectrum", t2_path()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "vertex_id,depth,nu,T,lambda\nR,0,1,1,1\nA,1,0.5,2,1.5\nB,1,0.5,2,1.5\n");
}

TEST(Cli, KernelCsv) {
  const auto all = run_cli({"kernel", t2_path()});
  EXPECT_EQ(all.code, 0);
  std::istringstream lines(all.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "x,y,sup_vertex,K");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 10u);
  EXPECT_NE(all.out.find("a1,b1,R,-1\n"), std::string::npos);

  const auto profile = run_cli({"kernel", t2_path(), "--profile"});
  EXPECT_EQ(profile.code, 0);
  EXPECT_EQ(profile.out.rfind("vertex_id,depth,distance,K\nR,0,1,-1\n", 0), 0u) << profile.out;
  EXPECT_EQ(profile.out, run_cli({"kernel", t2_path(), "--pairs", "profile"}).out);
  EXPECT_EQ(run_cli({"kernel", t2_path(), "--pairs", "some"}).code, 2);
}

TEST(Cli, WaveletsCsv) {
  const auto r = run_cli({"wavelets", t2_path()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("vertex_id,j,child_id,coefficient\nR,0,A,1\nR,0,B,1\nR,1,A,1\nR,1,B,-1\n", 0), 0u)
      << r.out;
}

TEST(Cli, SamplesAreDeterministic) {
  const auto a = run_cli({"sample", t2_path(), "--seed", "9", "--count", "3"});
  const auto b = run_cli({"sample", t2_path(), "--seed", "9", "--count", "3"});
  const auto c = run_cli({"sample", t2_path(), "--seed", "10", "--count", "3"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 13);
  EXPECT_EQ(a.out.rfind("sample_index,leaf_id,value\n0,a1,", 0), 0u);
}

TEST(Cli, McCovReport) {
  const auto r = run_cli({"mc-cov", t2_path(), "--n", "2000", "--seed", "1", "--tol-sigma", "5"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"max_abs_dev\""), std::string::npos);
  EXPECT_NE(r.out.find("\"worst_pair\": ["), std::string::npos);
  EXPECT_NE(r.out.find("\"pass\": true"), std::string::npos);
  EXPECT_EQ(r.out, run_cli({"mc-cov", t2_path(), "--n", "2000", "--seed", "1"}).out);
}

TEST(Cli, GeneratedTree) {
  const auto r = run_cli({"spectrum", "--gen", "2:3:1", "--t-root", "1", "--t-ratio", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("R,0,1,1,1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(",2,0.25,16,5.5\n"), std::string::npos) << r.out;
}

TEST(Cli, Convergence) {
  const auto ok = run_cli({"convergence", "--mu", "2", "--q", "0.25"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("\"conv1\": {\"evaluated\": true, \"converges\": true, \"ratio\": 0.5"), std::string::npos)
      << ok.out;
  const auto div = run_cli({"convergence", "--mu", "2", "--q", "0.5"});
  EXPECT_NE(div.out.find("\"converges\": false"), std::string::npos);
  EXPECT_NE(div.out.find("\"conv2\": {\"evaluated\": false"), std::string::npos) << div.out;
  EXPECT_NE(div.out.find("\"value\": null"), std::string::npos);
  EXPECT_EQ(run_cli({"convergence", "--mu", "0.5"}).code, 2);
}

TEST(Cli, OutFile) {
  const auto path = std::filesystem::temp_directory_path() / "ultrafield_out.csv";
  const auto r = run_cli({"--out", path.string(), "spectrum", t2_path()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), run_cli({"spectrum", t2_path()}).out);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace ultrafield
