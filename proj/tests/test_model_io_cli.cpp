#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "survmax/commands.hpp"
#include "survmax/errors.hpp"
#include "survmax/followup.hpp"
#include "survmax/model_io.hpp"

using namespace survmax;
using namespace survmax::cli;

namespace {

CureModel parse(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in, "inline");
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(ModelIo, ParsesAndRoundTrips) {
  const CureModel m = parse(
      "# reference model\nfamily.F = exponential\nparams.F = 1\nfamily.G = uniform\nparams.G = 0 2\np = 0.7\n");
  EXPECT_EQ(m.tau_G(), 2.0);
  EXPECT_EQ(m.p(), 0.7);
  EXPECT_EQ(m.lifetime().name(), "exponential");
  const CureModel again = parse(format_model(m));
  EXPECT_EQ(format_model(again), format_model(m));
  for (const CureModel& c :
       {CureModel(Distribution::truncated_exponential(0.5, 4.61), Distribution::endpoint_power(3.0, 1.5), 0.25),
        CureModel(Distribution::uniform(0.1, 2.0), Distribution::uniform(0.0, 1.0), 1.0)}) {
    const CureModel r = parse(format_model(c));
    EXPECT_EQ(r.describe(), c.describe());
    for (double x : {0.3, 0.9, 1.7}) EXPECT_EQ(r.h_sf(x), c.h_sf(x));
  }
}

TEST(ModelIo, RejectsMalformedFiles) {
  EXPECT_THROW(parse("family.F = exponential\nparams.F = 1\nfamily.G = uniform\nparams.G = 0 1\n"), ParseError);
  EXPECT_THROW(parse("family.F = gamma\nparams.F = 1\nfamily.G = uniform\nparams.G = 0 1\np=1\n"), ParseError);
  EXPECT_THROW(parse("family.F = exponential\nparams.F = x\nfamily.G = uniform\nparams.G = 0 1\np=1\n"), ParseError);
  EXPECT_THROW(parse("family.F exponential\n"), ParseError);
  EXPECT_THROW(parse("family.F = exponential\nparams.F = 1\nfamily.G = uniform\nparams.G = 0 1\np = 1.5\n"),
               DomainError);
  EXPECT_THROW(make_distribution("uniform", {1.0}), DomainError);
  EXPECT_THROW(load_model("/nonexistent/model.txt"), ParseError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(exit_code_for(ParseError("x", 2)), kInput);
  EXPECT_EQ(exit_code_for(DomainError("x")), kDomain);
  EXPECT_EQ(exit_code_for(QuadratureError("x", 0, 0)), kNumeric);
  EXPECT_EQ(exit_code_for(InsufficientDataError("x", 3)), kInsufficientData);
  EXPECT_EQ(exit_code_for(MisuseError("x")), kMisuse);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kFailure);
}

TEST(Cli, CdfMuReachesOneAtTauJ) {
  const CureModel m(Distribution::uniform(0, 5), Distribution::uniform(0, 10), 0.7);
  CdfConfig cfg;
  cfg.statistic = CdfStatistic::Mu;
  cfg.n = 3;
  cfg.grid = 11;
  std::ostringstream out;
  cmd_cdf(m, cfg, Format::Csv, out);
  const auto rows = csv_rows(out.str());
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0][2], "arg");
  EXPECT_NEAR(std::stod(rows[1][3]), std::pow(m.censored_total(), 3), 1e-15);
  EXPECT_DOUBLE_EQ(std::stod(rows[6][2]), 5.0);
  EXPECT_EQ(std::stod(rows[6][3]), 1.0);
  EXPECT_LT(std::stod(rows[5][3]), 1.0);
}

TEST(Cli, CdfDiffAtomAndJointGrid) {
  const CureModel m(Distribution::uniform(0, 1), Distribution::uniform(0, 1), 1.0);
  CdfConfig cfg;
  cfg.statistic = CdfStatistic::Diff;
  cfg.n = 2;
  cfg.grid = 5;
  std::ostringstream out;
  cmd_cdf(m, cfg, Format::Csv, out);
  const auto rows = csv_rows(out.str());
  EXPECT_NEAR(std::stod(rows[1][3]), 0.5, 1e-10);

  cfg.statistic = CdfStatistic::JointMuM;
  std::ostringstream joint;
  cmd_cdf(m, cfg, Format::Csv, joint);
  const auto jr = csv_rows(joint.str());
  EXPECT_EQ(jr.size(), 26u);
  EXPECT_EQ(jr[0][2], "t");
  EXPECT_EQ(jr[0][3], "x");

  std::ostringstream js;
  cmd_cdf(m, cfg, Format::Jsonl, js);
  EXPECT_EQ(js.str().front(), '{');
  cfg.grid = 1;
  std::ostringstream bad;
  EXPECT_THROW(cmd_cdf(m, cfg, Format::Csv, bad), DomainError);
}

TEST(Cli, Table1ScaledColumnIsExactProduct) {
  Table1Config cfg;
  cfg.tau_G = {1.0, 3.0};
  cfg.n = {50, 500};
  const auto rows = compute_table1(cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_EQ(r.quantile_scaled, r.b_n * r.quantile_unscaled);
  EXPECT_NEAR(rows[0].quantile_unscaled, 0.528, 0.005);
  EXPECT_NEAR(rows[3].quantile_unscaled, 0.760, 0.005);
  EXPECT_NEAR(rows[3].quantile_scaled, 9.81, 0.07);
  EXPECT_NEAR(rows[0].limit_quantile, 4.82, 0.01);

  std::ostringstream out;
  cmd_table1(cfg, Format::Csv, out);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("tau_G,n,quantile_unscaled,b_n,quantile_scaled,limit_quantile\n", 0), 0u);
  EXPECT_NE(text.find("# limit_discrepancy"), std::string::npos);
  std::ostringstream again;
  cmd_table1(cfg, Format::Csv, again);
  EXPECT_EQ(again.str(), text);
}

TEST(Cli, Table1TruncatedLifetimeLimit) {
  Table1Config cfg;
  cfg.tau_G = {1.0};
  cfg.n = {50};
  cfg.lifetime = Table1Lifetime::TruncatedExponential;
  EXPECT_NEAR(compute_table1(cfg)[0].limit_quantile, 4.80, 0.01);
}

TEST(Cli, SimulateIsByteIdentical) {
  SimulateConfig cfg;
  cfg.n = 20;
  cfg.reps = 500;
  cfg.seed = 99;
  std::ostringstream a, b;
  cmd_simulate(table1_model(2.0), cfg, Format::Csv, a);
  cfg.parallel.threads = 3;
  cmd_simulate(table1_model(2.0), cfg, Format::Csv, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(csv_rows(a.str()).size(), 501u);
}

TEST(Cli, QuantileCommand) {
  QuantileConfig cfg;
  cfg.n = {50, 100};
  cfg.probs = {0.5, 0.95};
  std::ostringstream out;
  cmd_quantile(table1_model(1.0), cfg, Format::Csv, out);
  const auto rows = csv_rows(out.str());
  EXPECT_EQ(rows.size(), 5u);
}

TEST(Cli, VerifySplitReport) {
  VerifySplitConfig cfg;
  cfg.t_bin = {0.68, 0.72};
  cfg.reps = 200000;
  std::ostringstream out;
  const mc::SplitReport rep = cmd_verify_split(table1_model(1.0), cfg, Format::Csv, out);
  EXPECT_TRUE(rep.passed());
  const std::string text = out.str();
  EXPECT_NE(text.find("bonferroni"), std::string::npos);
  EXPECT_NE(text.find("PASS"), std::string::npos);
}

TEST(Cli, FollowupMatchesLibrary) {
  const auto path = temp_file("survmax_followup_test.csv", "time,event\n0.2,1\n0.5,0\n0.45,1\n0.9,0\n0.1,1\n");
  const CureModel null_model = table1_model(1.0);
  FollowupConfig cfg;
  cfg.data_path = path.string();
  std::ostringstream out;
  cmd_followup(null_model, cfg, Format::Csv, out);
  const followup::FollowupResult lib =
      followup::test_sufficient_followup(followup::ingest_csv(path.string()), null_model, 0.05);
  const std::string text = out.str();
  EXPECT_NE(text.find(fmt::format("decision={}", followup::to_string(lib.decision))), std::string::npos);
  EXPECT_NE(text.find(fmt::format("q_observed={}", lib.q_observed)), std::string::npos);
  EXPECT_NE(text.find(fmt::format("critical_value={}", lib.critical_value)), std::string::npos);
  EXPECT_NE(text.find(fmt::format("p_value_bound={}", lib.p_value_bound)), std::string::npos);
  std::filesystem::remove(path);
}
