#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "survmax/commands.hpp"
#include "survmax/errors.hpp"
#include "survmax/model_io.hpp"

using namespace survmax;

namespace {

struct Common {
  std::string model_path;
  std::string out_path;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c, bool needs_model) {
  auto* opt = cmd->add_option("--model", c.model_path, "model file (key = value)")->check(CLI::ExistingFile);
  if (needs_model) opt->required();
  cmd->add_option("--out", c.out_path, "output path (default stdout)");
  cmd->add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
}

cli::Format format_of(const Common& c) { return c.format == "jsonl" ? cli::Format::Jsonl : cli::Format::Csv; }

// Writes to --out when given, stdout otherwise.
template <class Fn>
int with_output(const Common& c, Fn fn) {
  if (c.out_path.empty()) return fn(std::cout);
  std::ofstream out(c.out_path, std::ios::binary);
  if (!out) throw ParseError(fmt::format("cannot write '{}'", c.out_path), 0);
  return fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact, asymptotic and simulated laws of the largest censored and uncensored survival times"};
  app.require_subcommand(1);

  Common table1_c, cdf_c, quant_c, sim_c, split_c, fu_c;

  cli::Table1Config t1;
  std::string lifetime = "exponential";
  auto* table1 = app.add_subcommand("table1", "95% quantiles of M(n) - M_u(n), unscaled, scaled and limiting");
  add_common(table1, table1_c, false);
  table1->add_option("--tau-g", t1.tau_G, "censoring endpoints")->delimiter(',');
  table1->add_option("--n", t1.n, "sample sizes")->delimiter(',');
  table1->add_option("--prob", t1.prob, "quantile level")->check(CLI::Range(0.0, 1.0));
  table1->add_option("--p", t1.p, "susceptible fraction")->check(CLI::Range(0.0, 1.0));
  table1->add_option("--lifetime", lifetime, "exponential or truncated (normalized at 4.61)")
      ->check(CLI::IsMember({"exponential", "truncated"}));

  cli::CdfConfig cdf_cfg;
  std::string cdf_stat = "M";
  double cdf_upper = 0.0;
  auto* cdf = app.add_subcommand("cdf", "cdf grid of M, Mu, JointMuM, Diff or Ratio");
  add_common(cdf, cdf_c, true);
  cdf->add_option("--statistic", cdf_stat)->check(CLI::IsMember({"M", "Mu", "JointMuM", "Diff", "Ratio"}));
  cdf->add_option("--n", cdf_cfg.n)->check(CLI::PositiveNumber);
  cdf->add_option("--grid", cdf_cfg.grid, "grid resolution (>= 2)");
  auto* upper_opt = cdf->add_option("--upper", cdf_upper, "right end of the grid");

  cli::QuantileConfig q_cfg;
  std::string q_stat = "Diff";
  auto* quant = app.add_subcommand("quantile", "exact quantiles of Diff, Mu or M");
  add_common(quant, quant_c, true);
  quant->add_option("--statistic", q_stat)->check(CLI::IsMember({"Diff", "Mu", "M"}));
  quant->add_option("--n", q_cfg.n)->delimiter(',');
  quant->add_option("--prob", q_cfg.probs)->delimiter(',');

  cli::SimulateConfig sim_cfg;
  std::string sample_out;
  auto* sim = app.add_subcommand("simulate", "replication summaries as CSV");
  add_common(sim, sim_c, true);
  sim->add_option("--n", sim_cfg.n)->check(CLI::PositiveNumber);
  sim->add_option("--reps", sim_cfg.reps)->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_cfg.seed);
  sim->add_option("--threads", sim_cfg.parallel.threads);
  sim->add_option("--sample-out", sample_out, "also write replication 0 as time,event CSV");

  cli::VerifySplitConfig vs_cfg;
  double m_lo = 0.0, m_hi = 0.0;
  auto* split = app.add_subcommand("verify-split", "statistical check of the sample-splitting law");
  add_common(split, split_c, true);
  split->add_option("--n", vs_cfg.n)->check(CLI::PositiveNumber);
  split->add_option("--t-lo", vs_cfg.t_bin.lo);
  split->add_option("--t-hi", vs_cfg.t_bin.hi);
  split->add_option("--r", vs_cfg.r);
  auto* mlo_opt = split->add_option("--m-lo", m_lo);
  auto* mhi_opt = split->add_option("--m-hi", m_hi);
  mlo_opt->needs(mhi_opt);
  mhi_opt->needs(mlo_opt);
  split->add_option("--reps", vs_cfg.reps)->check(CLI::PositiveNumber);
  split->add_option("--seed", vs_cfg.seed);
  split->add_option("--threads", vs_cfg.options.parallel.threads);
  split->add_option("--null-shift", vs_cfg.options.null_shift, "shift of the below-sample reference point");

  cli::FollowupConfig fu_cfg;
  auto* fu = app.add_subcommand("followup-test", "sufficient follow-up test on a time,event CSV");
  add_common(fu, fu_c, true);
  fu->add_option("--data", fu_cfg.data_path)->required()->check(CLI::ExistingFile);
  fu->add_option("--alpha", fu_cfg.alpha);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (table1->parsed()) {
      t1.lifetime = lifetime == "truncated" ? cli::Table1Lifetime::TruncatedExponential : cli::Table1Lifetime::Exponential;
      return with_output(table1_c, [&](std::ostream& out) {
        cli::cmd_table1(t1, format_of(table1_c), out);
        return cli::kOk;
      });
    }
    if (cdf->parsed()) {
      const CureModel model = load_model(cdf_c.model_path);
      const std::map<std::string, cli::CdfStatistic> names{{"M", cli::CdfStatistic::M},
                                                            {"Mu", cli::CdfStatistic::Mu},
                                                            {"JointMuM", cli::CdfStatistic::JointMuM},
                                                            {"Diff", cli::CdfStatistic::Diff},
                                                            {"Ratio", cli::CdfStatistic::Ratio}};
      cdf_cfg.statistic = names.at(cdf_stat);
      if (upper_opt->count() > 0) cdf_cfg.upper = cdf_upper;
      return with_output(cdf_c, [&](std::ostream& out) {
        cli::cmd_cdf(model, cdf_cfg, format_of(cdf_c), out);
        return cli::kOk;
      });
    }
    if (quant->parsed()) {
      const CureModel model = load_model(quant_c.model_path);
      q_cfg.statistic = q_stat == "Mu"  ? exact::QuantileStatistic::Mu
                        : q_stat == "M" ? exact::QuantileStatistic::M
                                        : exact::QuantileStatistic::Diff;
      return with_output(quant_c, [&](std::ostream& out) {
        cli::cmd_quantile(model, q_cfg, format_of(quant_c), out);
        return cli::kOk;
      });
    }
    if (sim->parsed()) {
      const CureModel model = load_model(sim_c.model_path);
      if (!sample_out.empty()) {
        std::ofstream s(sample_out, std::ios::binary);
        if (!s) throw ParseError(fmt::format("cannot write '{}'", sample_out), 0);
        mc::write_sample_csv(s, mc::draw_sample(model, sim_cfg.n, sim_cfg.seed, 0));
      }
      return with_output(sim_c, [&](std::ostream& out) {
        cli::cmd_simulate(model, sim_cfg, format_of(sim_c), out);
        return cli::kOk;
      });
    }
    if (split->parsed()) {
      const CureModel model = load_model(split_c.model_path);
      if (mlo_opt->count() > 0) vs_cfg.m_bin = mc::Bin{m_lo, m_hi};
      return with_output(split_c, [&](std::ostream& out) {
        const mc::SplitReport report = cli::cmd_verify_split(model, vs_cfg, format_of(split_c), out);
        return report.passed() ? cli::kOk : cli::kCheckFailed;
      });
    }
    if (fu->parsed()) {
      const CureModel model = load_model(fu_c.model_path);
      return with_output(fu_c, [&](std::ostream& out) {
        cli::cmd_followup(model, fu_cfg, format_of(fu_c), out);
        return cli::kOk;
      });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kUsage;
}
