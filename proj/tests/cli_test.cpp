#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "bary/cli.hpp"
#include "bary/errors.hpp"
#include "bary/symops.hpp"

namespace bary {
namespace {

using Json = nlohmann::json;

RunConfig config(const std::string& sub) {
  RunConfig c;
  c.subcommand = sub;
  return c;
}

Json run_json(const RunConfig& c) {
  const RunOutcome r = run(c);
  EXPECT_EQ(r.exitCode, 0) << c.subcommand << ": " << r.message;
  return Json::parse(r.report);
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bary-cli");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ParseSpace, Grammar) {
  EXPECT_EQ(parse_space("H3").name(), ModelSpace::hyperbolic(3).name());
  EXPECT_EQ(parse_space("H2xR").dim(), 3);
  EXPECT_EQ(parse_space("H2xH2").dim(), 4);
  EXPECT_EQ(parse_space("R2xH3").dim(), 5);
  EXPECT_EQ(parse_space("T2:1,2.5").dim(), 2);
  for (const char* bad : {"Q7", "", "H", "R3", "H2x", "T2:1", "T2:1,-1", "H0"})
    EXPECT_THROW(parse_space(bad), ArgumentError) << bad;
}

TEST(Subcommands, Complete) {
  std::vector<std::string> names = subcommands();
  std::sort(names.begin(), names.end());
  const std::vector<std::string> expected{"barycenter", "bcg-extremize", "bcg-fuzz", "bochner",
                                          "bounds",     "busemann-check", "jac-scan", "lyapunov",
                                          "rank-scan",  "sigma-compare", "straighten", "tr-k"};
  EXPECT_EQ(names, expected);
}

TEST(Run, EverySubcommandPassesOnSmallInputs) {
  RunConfig c = config("tr-k");
  c.samples = 5;
  c.bruteSamples = 2000;
  EXPECT_EQ(run_json(c)["status"], "pass");

  c = config("bcg-fuzz");
  c.n = 4;
  c.samples = 200;
  EXPECT_EQ(run_json(c)["status"], "pass");

  c = config("bcg-extremize");
  c.n = 3;
  EXPECT_EQ(run_json(c)["status"], "pass");

  c = config("busemann-check");
  c.space = "H2xR";
  c.samples = 10;
  EXPECT_EQ(run_json(c)["status"], "pass");

  c = config("rank-scan");
  c.space = "H2xH2";
  c.samples = 20;
  EXPECT_EQ(run_json(c)["status"], "pass");

  c = config("lyapunov");
  c.samples = 2;
  EXPECT_EQ(run_json(c)["status"], "pass");

  for (const char* sub : {"barycenter", "straighten"}) {
    c = config(sub);
    c.samples = 2;
    c.radius = 1.0;
    EXPECT_EQ(run_json(c)["status"], "pass") << sub;
  }

  c = config("bochner");
  EXPECT_EQ(run_json(c)["status"], "pass");
}

TEST(Run, BoundsWithZeroIntegral) {
  RunConfig c = config("bounds");
  c.n = 3;
  c.uIntegral = 0.0;
  const Json j = run_json(c);
  EXPECT_EQ(j["lowerBound"], 0.0);
  EXPECT_NEAR(j["coefficient"].get<double>(), 0.155989, 1e-5);
}

TEST(Run, SigmaCompareTable) {
  RunConfig c = config("sigma-compare");
  const Json j = run_json(c);
  ASSERT_EQ(j["rows"].size(), 8u);
  for (const Json& row : j["rows"]) EXPECT_TRUE(row["inferior"].get<bool>()) << row["n"];
}

TEST(Run, JacScanExample) {
  RunConfig c = config("jac-scan");
  c.samples = 200;
  c.seed = 7;
  const Json j = run_json(c);
  EXPECT_EQ(j["status"], "pass");
  EXPECT_LE(j["maxRatio"].get<double>(), 0.649520);
  EXPECT_LE(j["maxJacAbs"].get<double>(), 8.0 * bcg_bound(3));
}

TEST(Run, SeededOutputIsByteIdentical) {
  RunConfig c = config("bcg-fuzz");
  c.n = 5;
  c.samples = 300;
  c.seed = 11;
  const std::string a = run(c).report, b = run(c).report;
  EXPECT_EQ(a, b);
  c.seed = 12;
  EXPECT_NE(run(c).report, a);
}

TEST(Run, ExitCodes) {
  EXPECT_EQ(run(config("no-such-command")).exitCode, 2);
  RunConfig c = config("rank-scan");
  c.space = "Q7";
  EXPECT_EQ(run(c).exitCode, 2);
  c = config("barycenter");
  c.space = "H2xR";
  EXPECT_EQ(run(c).exitCode, 2);
  c = config("bounds");
  c.format = "xml";
  EXPECT_EQ(run(c).exitCode, 2);

  c = config("busemann-check");
  c.samples = 5;
  c.tol = 1e-300;
  const RunOutcome r = run(c);
  EXPECT_EQ(r.exitCode, 1);
  EXPECT_EQ(Json::parse(r.report)["status"], "fail");
  EXPECT_FALSE(r.message.empty());
}

TEST(Run, FormatsAndReportFiles) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "bary_cli_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  RunConfig c = config("sigma-compare");
  c.out = (dir / "table.csv").string();
  c.format = "csv";
  RunOutcome r = run(c);
  ASSERT_EQ(r.exitCode, 0);
  EXPECT_EQ(r.path, c.out);
  EXPECT_EQ(read_file(c.out), r.report);
  EXPECT_NE(r.report.find("inferior"), std::string::npos);

  c = config("bounds");
  c.format = "text";
  r = run(c);
  EXPECT_NE(r.report.find("lowerBound"), std::string::npos);
  EXPECT_TRUE(r.path.empty());

  setenv(kOutDirEnv, dir.c_str(), 1);
  r = run(config("bounds"));
  unsetenv(kOutDirEnv);
  EXPECT_EQ(r.path, (dir / "bounds.json").string());
  EXPECT_EQ(Json::parse(read_file(r.path))["subcommand"], "bounds");
  std::filesystem::remove_all(dir);
}

TEST(CliMain, ParsesArguments) {
  const std::filesystem::path out = std::filesystem::temp_directory_path() / "bary_cli_main.json";
  EXPECT_EQ(cli({"bounds", "--n", "3", "--u-integral", "0", "--out", out.string()}), 0);
  EXPECT_EQ(Json::parse(read_file(out))["lowerBound"], 0.0);
  std::filesystem::remove(out);
  EXPECT_EQ(cli({"rank-scan", "--space", "Q7"}), 2);
  EXPECT_EQ(cli({"bounds", "--bogus"}), 2);
  EXPECT_EQ(cli({}), 2);
}

}  // namespace
}  // namespace bary
