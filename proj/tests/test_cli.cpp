#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ica/cli.hpp"
#include "ica/json_io.hpp"

using namespace ica;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ica_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) {
  return (std::filesystem::path(ICA_FIXTURE_DIR) / name).string();
}

std::filesystem::path temp(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST(Cli, GapGenBudgetRatio) {
  const CliRun r = cli({"gap-gen", "--valuation", fixture("budget_c2.json"), "--width", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j.at("verification").at("ratio").get<double>(), 4.0 / 3.0, 1e-9);
  EXPECT_TRUE(j.at("verification").at("passed").get<bool>());
  EXPECT_EQ(j.at("instance").at("m"), 3);

  const auto out = temp("ica_cli_gap.json");
  ASSERT_EQ(cli({"gap-gen", "--valuation", fixture("budget_c2.json"), "--width", "2", "--out",
                 out.string()})
                .code,
            kExitOk);
  EXPECT_EQ(read_json_file(out), j);
  std::filesystem::remove(out);
}

TEST(Cli, GapGenLinearFails) {
  const CliRun r = cli({"gap-gen", "--valuation", fixture("linear.json"), "--width", "1"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("mu=1"), std::string::npos);
}

TEST(Cli, SolveWbbSingleAgent) {
  const CliRun r = cli({"solve", "--instance", fixture("wbb_single.json"), "--mode", "wbb",
                        "--omega", "1", "--epsilon", "0.05"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(Json::parse(r.out).at("product_objective").get<double>(), 2.0, 1e-12);
}

TEST(Cli, SolveModesAndTrace) {
  const auto trace = temp("ica_cli_trace.jsonl");
  for (const char* mode : {"mult", "add"}) {
    const CliRun r = cli({"solve", "--instance", fixture("two_agent_budget.json"), "--mode", mode,
                          "--epsilon", "0.05", "--trace", trace.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_TRUE(j.at("dual_feasible").get<bool>());
    std::ifstream f(trace);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(f, line)) {
      const Json ev = Json::parse(line);
      EXPECT_TRUE(ev.contains("event"));
      EXPECT_TRUE(ev.contains("agent"));
      ++lines;
    }
    EXPECT_GT(lines, 0u) << mode;
  }
  std::filesystem::remove(trace);

  const CliRun g = cli({"solve", "--instance", fixture("two_agent_budget.json"), "--mu", "guess"});
  ASSERT_EQ(g.code, kExitOk) << g.err;
  EXPECT_TRUE(Json::parse(g.out).contains("accepted_guess"));
}

TEST(Cli, MalformedInputsExitTwoWithPath) {
  CliRun r = cli({"solve", "--instance", fixture("bad_row.json")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("utilities[1]"), std::string::npos) << r.err;

  r = cli({"solve", "--instance", fixture("bad_cap.json")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("agents[0].valuation.cap"), std::string::npos) << r.err;

  r = cli({"oracle", "--instance", fixture("truncated.json")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("truncated.json"), std::string::npos) << r.err;

  r = cli({"solve", "--instance", fixture("missing.json")});
  EXPECT_EQ(r.code, kExitValidation);

  EXPECT_EQ(cli({"solve"}).code, kExitValidation);
  EXPECT_EQ(cli({"solve", "--instance", fixture("wbb_single.json"), "--mode", "nope"}).code,
            kExitValidation);
  EXPECT_EQ(cli({}).code, kExitValidation);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, Curvature) {
  const CliRun r = cli({"curvature", "--valuation", fixture("budget_c2.json"), "--width", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j.at("value").get<double>(), 4.0 / 3.0, 1e-12);

  const CliRun n = cli({"curvature", "--valuation", fixture("budget_c2.json"), "--width", "2",
                        "--kind", "add", "--numeric"});
  ASSERT_EQ(n.code, kExitOk) << n.err;
  EXPECT_NEAR(Json::parse(n.out).at("value").get<double>(), 0.5, 1e-9);
}

TEST(Cli, Oracle) {
  const CliRun r = cli({"oracle", "--instance", fixture("two_agent_budget.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("allocation").at("owner").size(), 4u);

  const CliRun n =
      cli({"oracle", "--instance", fixture("wbb_single.json"), "--objective", "nash"});
  ASSERT_EQ(n.code, kExitOk) << n.err;
  EXPECT_NEAR(Json::parse(n.out).at("value").get<double>(), std::log(2.0), 1e-15);
}

TEST(Cli, BenchIsByteIdenticalWithoutTiming) {
  const std::vector<std::string> args{"bench", "--suite", "random", "--n",    "2",
                                      "--m",   "4",       "--count", "5",      "--seed",
                                      "11",    "--no-timing"};
  const CliRun a = cli(args);
  const CliRun b = cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream lines(a.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "instance_id,primal,dual,certificate,oracle,updates,reassignments,wall_ms");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
    ++rows;
  }
  EXPECT_EQ(rows, 5u);

  const CliRun gap = cli({"bench", "--suite", "gap", "--count", "3", "--no-timing"});
  ASSERT_EQ(gap.code, kExitOk) << gap.err;
  EXPECT_EQ(gap.out, cli({"bench", "--suite", "gap", "--count", "3", "--no-timing"}).out);
}
