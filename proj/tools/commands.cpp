#include "survmax/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"
#include "survmax/asymptotics.hpp"
#include "survmax/errors.hpp"
#include "survmax/followup.hpp"

namespace survmax::cli {

namespace {

using nlohmann::json;

std::string num(double x) { return fmt::format("{}", x); }

void emit(std::ostream& out, Format format, const std::vector<std::string>& keys, const std::vector<json>& values,
          bool& header_written) {
  if (format == Format::Jsonl) {
    json row = json::object();
    for (std::size_t i = 0; i < keys.size(); ++i) row[keys[i]] = values[i];
    out << row.dump() << '\n';
    return;
  }
  if (!header_written) {
    out << fmt::format("{}\n", fmt::join(keys, ","));
    header_written = true;
  }
  std::vector<std::string> cells;
  for (const auto& v : values) {
    if (v.is_string()) {
      cells.push_back(v.get<std::string>());
    } else if (v.is_number_float()) {
      cells.push_back(num(v.get<double>()));
    } else {
      cells.push_back(v.dump());
    }
  }
  out << fmt::format("{}\n", fmt::join(cells, ","));
}

std::string statistic_name(CdfStatistic s) {
  switch (s) {
    case CdfStatistic::M:
      return "M";
    case CdfStatistic::Mu:
      return "Mu";
    case CdfStatistic::JointMuM:
      return "JointMuM";
    case CdfStatistic::Diff:
      return "Diff";
    case CdfStatistic::Ratio:
      return "Ratio";
  }
  return "?";
}

std::string statistic_name(exact::QuantileStatistic s) {
  switch (s) {
    case exact::QuantileStatistic::Diff:
      return "Diff";
    case exact::QuantileStatistic::Mu:
      return "Mu";
    case exact::QuantileStatistic::M:
      return "M";
  }
  return "?";
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) != nullptr) return kInput;
  if (dynamic_cast<const MisuseError*>(&e) != nullptr) return kMisuse;
  if (dynamic_cast<const InsufficientDataError*>(&e) != nullptr) return kInsufficientData;
  if (dynamic_cast<const QuadratureError*>(&e) != nullptr || dynamic_cast<const BracketError*>(&e) != nullptr ||
      dynamic_cast<const DegenerateModelError*>(&e) != nullptr) {
    return kNumeric;
  }
  if (dynamic_cast<const DomainError*>(&e) != nullptr) return kDomain;
  return kFailure;
}

CureModel table1_model(double tau_G, Table1Lifetime lifetime, double p) {
  Distribution F = lifetime == Table1Lifetime::Exponential ? Distribution::exponential(1.0)
                                                           : Distribution::truncated_exponential(1.0, 4.61);
  return CureModel(F, Distribution::uniform(0.0, tau_G), p);
}

std::optional<double> reference_limit(double tau_G) {
  if (tau_G == 1.0) return 5.77;
  if (tau_G == 2.0) return 9.51;
  if (tau_G == 3.0) return 15.67;
  if (tau_G == 4.0) return 25.84;
  return std::nullopt;
}

std::vector<Table1Row> compute_table1(const Table1Config& config) {
  std::vector<Table1Row> rows;
  for (double tau_G : config.tau_G) {
    const CureModel model = table1_model(tau_G, config.lifetime, config.p);
    const asymptotics::LimitCase lc = asymptotics::classify(model);
    const double limit = asymptotics::limit_quantile(lc, asymptotics::LimitWhich::Mu, config.prob);
    for (long n : config.n) {
      try {
        Table1Row row;
        row.tau_G = tau_G;
        row.n = n;
        row.quantile_unscaled = exact::quantile(model, n, exact::QuantileStatistic::Diff, config.prob, config.quad);
        row.b_n = asymptotics::norming(model, lc, n).b_n;
        row.quantile_scaled = row.b_n * row.quantile_unscaled;
        row.limit_quantile = limit;
        rows.push_back(row);
      } catch (const QuadratureError& e) {
        throw QuadratureError(fmt::format("tau_G={} n={}: {}", tau_G, n, e.what()), e.best_estimate(),
                              e.achieved_error());
      } catch (const BracketError& e) {
        throw BracketError(fmt::format("tau_G={} n={}: {}", tau_G, n, e.what()));
      }
    }
  }
  return rows;
}

void cmd_table1(const Table1Config& config, Format format, std::ostream& out) {
  const std::vector<Table1Row> rows = compute_table1(config);
  bool header = false;
  const std::vector<std::string> keys{"tau_G", "n", "quantile_unscaled", "b_n", "quantile_scaled", "limit_quantile"};
  for (const auto& r : rows) {
    emit(out, format, keys, {r.tau_G, r.n, r.quantile_unscaled, r.b_n, r.quantile_scaled, r.limit_quantile}, header);
  }
  // One footnote per tau_G whose published infinity value differs from the closed form.
  for (double tau_G : config.tau_G) {
    const auto ref = reference_limit(tau_G);
    if (!ref || config.prob != 0.95) continue;
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const Table1Row& r) { return r.tau_G == tau_G; });
    if (it == rows.end()) continue;
    const double ratio = *ref / it->limit_quantile;
    if (std::abs(ratio - 1.0) <= 0.01) continue;
    const std::string note = fmt::format(
        "limit_discrepancy tau_G={}: closed-form limit quantile {:.4f} vs published infinity value {:.2f} (ratio {:.3f})",
        tau_G, it->limit_quantile, *ref, ratio);
    if (format == Format::Jsonl) {
      out << json{{"footnote", note}}.dump() << '\n';
    } else {
      out << "# " << note << '\n';
    }
  }
}

void cmd_cdf(const CureModel& model, const CdfConfig& config, Format format, std::ostream& out) {
  if (config.grid < 2) throw DomainError("grid resolution must be >= 2");
  if (config.n < 1) throw DomainError("n must be >= 1");
  const long n = config.n;
  double lo = config.statistic == CdfStatistic::Ratio ? 1.0 : 0.0;
  double hi = 0.0;
  if (config.upper) {
    hi = *config.upper;
  } else if (config.statistic == CdfStatistic::Ratio) {
    hi = 5.0;
  } else if (std::isfinite(model.tau_H())) {
    hi = model.tau_H();
  } else {
    hi = exact::quantile(model, n, exact::QuantileStatistic::M, 0.999, config.quad);
  }
  if (!(hi > lo)) throw DomainError(fmt::format("cdf grid upper bound {} must exceed {}", hi, lo));
  const std::string name = statistic_name(config.statistic);
  auto point = [&](int i) { return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(config.grid - 1); };
  bool header = false;
  if (config.statistic == CdfStatistic::JointMuM) {
    const std::vector<std::string> keys{"statistic", "n", "t", "x", "cdf"};
    for (int i = 0; i < config.grid; ++i) {
      for (int j = 0; j < config.grid; ++j) {
        const double t = point(i);
        const double x = point(j);
        emit(out, format, keys, {name, n, t, x, exact::joint_mu_m(model, n, t, x).value}, header);
      }
    }
    return;
  }
  const std::vector<std::string> keys{"statistic", "n", "arg", "cdf", "error_estimate"};
  for (int i = 0; i < config.grid; ++i) {
    const double a = point(i);
    exact::CdfValue v;
    switch (config.statistic) {
      case CdfStatistic::M:
        v = exact::m_cdf(model, n, a);
        break;
      case CdfStatistic::Mu:
        v = exact::mu_cdf(model, n, a);
        break;
      case CdfStatistic::Diff:
        v = exact::diff_cdf(model, n, a, config.quad);
        break;
      case CdfStatistic::Ratio:
        v = exact::ratio_cdf(model, n, a, config.quad);
        break;
      case CdfStatistic::JointMuM:
        break;
    }
    emit(out, format, keys, {name, n, a, v.value, v.error_estimate}, header);
  }
}

void cmd_quantile(const CureModel& model, const QuantileConfig& config, Format format, std::ostream& out) {
  bool header = false;
  const std::vector<std::string> keys{"statistic", "n", "prob", "quantile"};
  for (long n : config.n) {
    for (double prob : config.probs) {
      emit(out, format, keys,
           {statistic_name(config.statistic), n, prob, exact::quantile(model, n, config.statistic, prob, config.quad)},
           header);
    }
  }
}

void cmd_simulate(const CureModel& model, const SimulateConfig& config, Format format, std::ostream& out) {
  const std::vector<mc::SampleSummary> summaries =
      mc::simulate(model, config.n, config.reps, config.seed, config.parallel);
  if (format == Format::Csv) {
    mc::write_summaries_csv(out, summaries);
    return;
  }
  long rep = 0;
  for (const auto& s : summaries) {
    out << json{{"rep", rep++}, {"M", s.M},           {"Mu", s.Mu},         {"n_u", s.n_u},
                {"n_c", s.n_c}, {"n_c_gt", s.n_c_gt}, {"n_c_lt", s.n_c_lt}, {"n_u_lt", s.n_u_lt},
                {"q_n", s.q_n}}
               .dump()
        << '\n';
  }
}

mc::SplitReport cmd_verify_split(const CureModel& model, const VerifySplitConfig& config, Format format,
                                 std::ostream& out) {
  const mc::SplitReport report =
      config.m_bin ? mc::verify_split_given_m(model, config.n, config.t_bin, *config.m_bin, config.r, config.reps,
                                              config.seed, config.options)
                   : mc::verify_split(model, config.n, config.t_bin, config.r, config.reps, config.seed, config.options);
  bool header = false;
  const std::vector<std::string> keys{"test", "status", "statistic", "p_value", "size", "note"};
  for (const auto& t : report.tests) {
    if (t.skipped) {
      emit(out, format, keys, {t.name, "SKIPPED", "", "", "", t.note}, header);
    } else {
      const char* status = t.informational ? "INFO" : (t.p_value > report.significance ? "PASS" : "FAIL");
      emit(out, format, keys, {t.name, status, t.statistic, t.p_value, t.size, ""}, header);
    }
  }
  const std::string note = fmt::format("qualifying={} of reps={}", report.qualifying, report.reps);
  emit(out, format, keys,
       {"bonferroni", report.passed() ? "PASS" : "FAIL", "", report.bonferroni_p(), report.qualifying, note}, header);
  return report;
}

void cmd_followup(const CureModel& model, const FollowupConfig& config, Format format, std::ostream& out) {
  const followup::Dataset data = followup::ingest_csv(config.data_path);
  const followup::FollowupResult res = followup::test_sufficient_followup(data, model, config.alpha, config.quad);
  if (format == Format::Jsonl) {
    out << json{{"n", res.n},
                {"q_observed", res.q_observed},
                {"critical_value", res.critical_value},
                {"p_value_bound", res.p_value_bound},
                {"alpha", res.alpha},
                {"decision", followup::to_string(res.decision)},
                {"null_model", res.null_model}}
               .dump()
        << '\n';
    return;
  }
  out << fmt::format("# sufficient follow-up test on {} ({} records)\n", data.source, res.n);
  out << fmt::format("n={}\n", res.n);
  out << fmt::format("q_observed={}\n", num(res.q_observed));
  out << fmt::format("critical_value={}\n", num(res.critical_value));
  out << fmt::format("p_value_bound={}\n", num(res.p_value_bound));
  out << fmt::format("alpha={}\n", num(res.alpha));
  out << fmt::format("decision={}\n", followup::to_string(res.decision));
  out << fmt::format("null_model={}\n", res.null_model);
}

}  // namespace survmax::cli
