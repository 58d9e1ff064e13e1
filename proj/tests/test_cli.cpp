#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "diffdp/chain_io.hpp"
#include "diffdp/error.hpp"

using namespace diffdp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

int count_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  int rows = -1;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CliSimulate, RowCounts) {
  auto r = run_cli({"simulate", "--times", "100", "--per-time", "1", "--t-max", "10", "--seed", "7", "--out", "-"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("time,value\n", 0), 0u);
  EXPECT_EQ(count_rows(r.out), 100);
  r = run_cli({"simulate", "--times", "100", "--per-time", "5", "--t-max", "10", "--seed", "7", "--out", "-"});
  ASSERT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(count_rows(r.out), 500);
}

TEST(CliSimulate, SameSeedSameFile) {
  const auto dir = scratch_dir("diffdp_cli_sim");
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  ASSERT_EQ(run_cli({"simulate", "--seed", "3", "--out", a}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"simulate", "--seed", "3", "--out", b}).code, cli::kExitOk);
  EXPECT_EQ(read_file(a), read_file(b));
  ASSERT_EQ(run_cli({"simulate", "--seed", "4", "--out", b}).code, cli::kExitOk);
  EXPECT_NE(read_file(a), read_file(b));
  fs::remove_all(dir);
}

TEST(CliErrors, UsageAndData) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"simulate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"simulate", "--times", "0", "--out", "-"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"validate", "--quad-tol", "abc"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"validate", "--alpha", "2"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"fit"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"fit", "--data", "/nonexistent/data.csv"}).code, cli::kExitData);
  EXPECT_EQ(run_cli({"summarize", "--draws", "/nonexistent/x.draws", "--out-prefix", "/tmp/x"}).code,
            cli::kExitData);
}

TEST(CliErrors, UnsortedTimesNameTheRow) {
  const auto dir = scratch_dir("diffdp_cli_unsorted");
  const auto data = dir / "d.csv";
  std::ofstream(data) << "time,value\n0,1.0\n2,0.5\n1,0.3\n";
  const auto r = run_cli({"fit", "--data", data.string(), "--out-dir", dir.string(), "--quiet"});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
  fs::remove_all(dir);
}

TEST(CliConfig, KeyValueParsing) {
  std::istringstream in(
      "# comment\n"
      "iters = 300\n"
      "stick_law = pitman_yor   # trailing\n"
      "sigma = 0.25\n"
      "data = my data.csv\n"
      "centering.shape = 4\n"
      "\n");
  const auto j = cli::parse_key_value_config(in);
  EXPECT_EQ(j.at("iters").get<int>(), 300);
  EXPECT_EQ(j.at("stick_law").get<std::string>(), "pitman_yor");
  EXPECT_DOUBLE_EQ(j.at("sigma").get<double>(), 0.25);
  EXPECT_EQ(j.at("data").get<std::string>(), "my data.csv");
  EXPECT_DOUBLE_EQ(j.at("centering").at("shape").get<double>(), 4.0);
  std::istringstream bad("iters 300\n");
  EXPECT_THROW(cli::parse_key_value_config(bad), ConfigError);
  std::istringstream nokey("= 3\n");
  EXPECT_THROW(cli::parse_key_value_config(nokey), ConfigError);
}

TEST(CliFit, EndToEndWithConfigPrecedence) {
  const auto dir = scratch_dir("diffdp_cli_fit");
  const auto data = (dir / "toy.csv").string();
  ASSERT_EQ(run_cli({"simulate", "--times", "8", "--per-time", "2", "--t-max", "3", "--seed", "5", "--out", data})
                .code,
            cli::kExitOk);
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "burn_in = 20\niters = 400\nthin = 4\nseed = 9\nchains = 2\ndata = " << data
                     << "\nout_dir = " << dir.string() << "\n";
  // The flag overrides the file's iters.
  auto r = run_cli({"fit", "--config", cfg.string(), "--iters", "100", "--telemetry-every", "10"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto summary = nlohmann::json::parse(read_file(dir / "fit_summary.json"));
  EXPECT_EQ(summary.at("chains").get<int>(), 2);
  EXPECT_EQ(summary.at("draws_per_chain").get<int>(), 25);
  EXPECT_EQ(summary.at("config").at("iters").get<int>(), 100);
  EXPECT_TRUE(summary.at("diagnostics").contains("theta"));

  const auto d0 = read_draws(dir / "chain_0.draws"), d1 = read_draws(dir / "chain_1.draws");
  EXPECT_EQ(d0.draws.size(), 25u);
  EXPECT_NE(d0.draws.back().theta, d1.draws.back().theta);
  EXPECT_FALSE(read_file(dir / "chain_0.telemetry").empty());

  const auto prefix = (dir / "post").string();
  r = run_cli({"summarize", "--draws", (dir / "chain_0.draws").string(), (dir / "chain_1.draws").string(),
               "--out-prefix", prefix, "--data", data, "--y-points", "30", "--truth", "toy"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report.at("draws").get<int>(), 50);
  EXPECT_EQ(report.at("times").get<int>(), 8);
  const double cov = report.at("coverage").at("mean_band").get<double>();
  EXPECT_GE(cov, 0.0);
  EXPECT_LE(cov, 1.0);
  EXPECT_EQ(count_rows(read_file(prefix + "_surface.csv")), 8 * 30);
  EXPECT_EQ(count_rows(read_file(prefix + "_mean.csv")), 8);
  EXPECT_TRUE(fs::exists(prefix + "_surface.json"));
  EXPECT_TRUE(fs::exists(prefix + "_coverage.json"));

  EXPECT_EQ(run_cli({"summarize", "--draws", (dir / "chain_0.draws").string(), "--out-prefix", prefix}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"summarize", "--draws", (dir / "chain_0.draws").string(), "--out-prefix", prefix,
                     "--y-min", "0", "--y-max", "1", "--truth", "other"})
                .code,
            cli::kExitUsage);
  fs::remove_all(dir);
}

TEST(CliFit, FixedHyperparametersStayFixed) {
  const auto dir = scratch_dir("diffdp_cli_fixed");
  const auto data = (dir / "toy.csv").string();
  ASSERT_EQ(run_cli({"simulate", "--times", "5", "--t-max", "2", "--out", data}).code, cli::kExitOk);
  const auto r = run_cli({"fit", "--data", data, "--out-dir", dir.string(), "--burn-in", "5", "--iters", "20",
                          "--thin", "2", "--fix-theta", "1", "--fix-c", "0.5", "--quiet"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  for (const auto& d : read_draws(dir / "chain_0.draws").draws) {
    EXPECT_EQ(d.theta, 1.0);
    EXPECT_EQ(d.c, 0.5);
  }
  fs::remove_all(dir);
}

TEST(CliSummarize, SingleDrawIsDegenerate) {
  const auto dir = scratch_dir("diffdp_cli_single");
  const auto data = (dir / "toy.csv").string();
  ASSERT_EQ(run_cli({"simulate", "--times", "4", "--t-max", "2", "--out", data}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"fit", "--data", data, "--out-dir", dir.string(), "--burn-in", "3", "--iters", "6", "--thin",
                     "6", "--quiet"})
                .code,
            cli::kExitOk);
  const auto prefix = (dir / "one").string();
  const auto r = run_cli({"summarize", "--draws", (dir / "chain_0.draws").string(), "--out-prefix", prefix,
                          "--y-min", "-2", "--y-max", "4", "--y-points", "7"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream csv(read_file(prefix + "_surface.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    std::vector<double> f;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) f.push_back(std::stod(cell));
    ASSERT_EQ(f.size(), 6u);
    EXPECT_DOUBLE_EQ(f[2], f[4]);
    EXPECT_DOUBLE_EQ(f[3], f[4]);
  }
  fs::remove_all(dir);
}

TEST(CliValidate, QuickBatteryPasses) {
  const auto r = run_cli({"validate", "--quick"});
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_TRUE(report.at("all_pass").get<bool>()) << r.out;
  EXPECT_EQ(r.code, cli::kExitOk);
}
