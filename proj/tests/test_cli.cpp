#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "cli.hpp"
#include "permuton/core.hpp"
#include "permuton/io.hpp"

using namespace permuton;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "permuton-lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("permuton_cli_test_" + name);
}

}  // namespace

TEST(Cli, NGridParsing) {
  EXPECT_EQ(cli::parse_n_grid("4096:524288:geometric:8").size(), 8u);
  EXPECT_EQ(cli::parse_n_grid("4096:524288:geometric"), cli::parse_n_grid("4096:524288:geometric:8"));
  EXPECT_EQ(cli::parse_n_grid("100:100000:geometric:4"), (std::vector<std::uint64_t>{100, 1000, 10000, 100000}));
  for (const char* bad : {"", "10:20", "10:20:linear", "20:10:geometric", "0:10:geometric", "a:10:geometric",
                          "10:20:geometric:0", "-5:10:geometric", "10:12:geometric:9"})
    EXPECT_THROW(cli::parse_n_grid(bad), cli::UsageError) << bad;
}

TEST(Cli, EstimateGridProducesOneRowPerSize) {
  const CliRun r = run({"estimate", "--family", "ref:beta=1.5,gamma=0", "--n-grid", "64:512:geometric:4",
                     "--replicates", "8", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[0], "family,N,replicates,mean_lis,std_lis,stderr,seed");
  const auto fields = io::parse_csv_row(ls[1]);
  ASSERT_EQ(fields.size(), 7u);
  EXPECT_EQ(fields[0], "ref:beta=1.5,gamma=0");
  EXPECT_EQ(fields[1], "64");
  EXPECT_EQ(ls[1].front(), '"');  // the family contains a comma
}

TEST(Cli, DeterministicAndThreadIndependent) {
  const std::vector<std::string> base{"estimate", "--family", "corner-radial:alpha=-1", "--n-grid",
                                      "100:1600:geometric", "--replicates", "12", "--seed", "9"};
  auto with_threads = [&](const char* t) {
    auto a = base;
    a.push_back("--threads");
    a.push_back(t);
    return run(a);
  };
  const CliRun a = with_threads("1"), b = with_threads("1"), c = with_threads("3");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(lines(a.out).size(), 6u);
}

TEST(Cli, JsonLines) {
  const CliRun r = run({"estimate", "--family", "uniform", "--n", "100", "--replicates", "4", "--json"});
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 1u);
  const auto j = nlohmann::json::parse(ls[0]);
  EXPECT_EQ(j.at("N"), 100);
  EXPECT_EQ(j.at("family"), "uniform");
  EXPECT_TRUE(j.contains("stderr"));
}

TEST(Cli, SampleCsvAndWitness) {
  const CliRun r = run({"sample", "--family", "diag-power:alpha=-0.5", "--n", "50", "--seed", "3"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  EXPECT_EQ(read_point_csv(in).size(), 50u);
  const CliRun w = run({"sample", "--family", "uniform", "--n", "30", "--emit-witness"});
  ASSERT_EQ(w.code, 0);
  const auto ls = lines(w.out);
  EXPECT_EQ(ls[0], "x,y,in_lis");
  EXPECT_EQ(ls.size(), 31u);
}

TEST(Cli, OutputFile) {
  const auto path = temp_path("points.csv");
  const CliRun r = run({"sample", "--family", "uniform", "--n", "10", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  EXPECT_EQ(read_point_csv(in).size(), 10u);
  std::filesystem::remove(path);
}

TEST(Cli, FitFromGridAndFromFile) {
  const CliRun f = run({"fit", "--family", "uniform", "--n-grid", "256:4096:geometric", "--replicates", "16"});
  ASSERT_EQ(f.code, 0) << f.err;
  const auto ls = lines(f.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "family,exponent,log_coeff,intercept,r_squared,n_points");
  const auto fields = io::parse_csv_row(ls[1]);
  EXPECT_NEAR(io::parse_real(fields[1]), 0.5, 0.08);
  EXPECT_EQ(fields[5], "5");

  const auto path = temp_path("estimates.csv");
  ASSERT_EQ(run({"estimate", "--family", "uniform", "--n-grid", "256:4096:geometric", "--replicates", "16", "--out",
                 path.string()})
                .code,
            0);
  const CliRun g = run({"fit", "--in", path.string(), "--with-log-correction"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(lines(g.out).size(), 2u);
  std::filesystem::remove(path);
}

TEST(Cli, GridCheckRows) {
  const CliRun r = run({"grid-check", "--family", "diag-power:alpha=-0.5", "--n-grid", "100:10000:geometric:3",
                     "--replicates", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 7u);
  EXPECT_EQ(ls[0], "N,alpha,b,lower,lis,upper,chain_cap,seed");
  const CliRun j = run({"grid-check", "--family", "uniform", "--n", "200", "--json", "--emit-witness"});
  ASSERT_EQ(j.code, 0);
  const auto obj = nlohmann::json::parse(lines(j.out)[0]);
  EXPECT_LE(obj.at("lower").get<int>(), obj.at("lis").get<int>());
  EXPECT_TRUE(obj.at("chain").is_array());
}

TEST(Cli, ConcentrationRows) {
  const CliRun r = run({"concentration", "--family", "uniform", "--n", "400", "--replicates", "300", "--lambda",
                     "0,5,20"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "family,N,lambda,empirical_tail,mcdiarmid,talagrand_up,talagrand_down,median");
  const CliRun j = run({"concentration", "--family", "uniform", "--n", "400", "--replicates", "300", "--json"});
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(lines(j.out).size(), 5u);
  EXPECT_TRUE(nlohmann::json::parse(lines(j.out)[0]).contains("empirical_upper"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto path = temp_path("config.json");
  {
    std::ofstream cfg(path);
    cfg << R"({"family": "uniform", "n": 20, "seed": 4, "replicates": 3})";
  }
  const CliRun a = run({"estimate", "--config", path.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("uniform,20,3,"), std::string::npos);
  const CliRun b = run({"estimate", "--config", path.string(), "--n", "30"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NE(b.out.find("uniform,30,3,"), std::string::npos);
  {
    std::ofstream cfg(path);
    cfg << R"({"family": "uniform", "bogus": 1})";
  }
  EXPECT_EQ(run({"estimate", "--config", path.string(), "--n", "5"}).code, 1);
  std::filesystem::remove(path);
}

TEST(Cli, UsageErrors) {
  const CliRun bad_family = run({"estimate", "--family", "gaussian", "--n", "10"});
  EXPECT_EQ(bad_family.code, 1);
  EXPECT_NE(bad_family.err.find("--family"), std::string::npos);
  EXPECT_NE(bad_family.err.find("corner-pinched:beta=B,c=C"), std::string::npos);
  EXPECT_EQ(run({"estimate", "--family", "ref:beta=0.5", "--n", "10"}).code, 1);
  EXPECT_EQ(run({"estimate", "--family", "uniform"}).code, 1);
  EXPECT_EQ(run({"estimate", "--family", "uniform", "--n", "10", "--replicates", "1"}).code, 1);
  EXPECT_EQ(run({"estimate", "--family", "uniform", "--n-grid", "1:2:linear"}).code, 1);
  EXPECT_EQ(run({"nonsense"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"grid-check", "--family", "uniform", "--n", "10", "--alpha", "0.5"}).code, 1);
  EXPECT_EQ(run({"verify", "--suite", "secondary"}).code, 1);
}

TEST(Cli, VerifySubset) {
  const CliRun r = run({"verify", "--suite", "primary", "--seed", "1", "--criteria", "1,9"});
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0].rfind("PASS [1]", 0), 0u);
  EXPECT_NE(ls[1].find("[9]"), std::string::npos);
  // Exit status reflects every selected criterion.
  const bool all_pass = ls[1].rfind("PASS", 0) == 0;
  EXPECT_EQ(r.code, all_pass ? 0 : 2);
}

TEST(Cli, BinaryExitCodes) {
  const std::string exe = PERMUTON_LAB_EXE;
  auto status = [&](const std::string& args) {
    const int s = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("sample --family uniform --n 5"), 0);
  EXPECT_EQ(status("sample --family nope --n 5"), 1);
  EXPECT_EQ(status("sample --n 5 --bogus-flag"), 1);
}
