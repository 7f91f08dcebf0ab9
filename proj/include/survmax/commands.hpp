#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "survmax/cure_model.hpp"
#include "survmax/exact.hpp"
#include "survmax/montecarlo.hpp"
#include "survmax/quadrature.hpp"

namespace survmax::cli {

enum class Format { Csv, Jsonl };

/// Process exit status by error category.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInput = 3,
  kDomain = 4,
  kNumeric = 5,
  kInsufficientData = 6,
  kMisuse = 7,
  kCheckFailed = 8,
};

int exit_code_for(const std::exception& e);

enum class Table1Lifetime { Exponential, TruncatedExponential };

/// Exponential(1) (or its normalized truncation at 4.61) lifetimes, uniform
/// censoring on [0, tau_G], susceptible fraction p.
CureModel table1_model(double tau_G, Table1Lifetime lifetime = Table1Lifetime::Exponential, double p = 0.7);

struct Table1Config {
  std::vector<double> tau_G{1, 2, 3, 4};
  std::vector<long> n{50, 100, 500, 5000, 20000};
  double prob = 0.95;
  double p = 0.7;
  Table1Lifetime lifetime = Table1Lifetime::Exponential;
  QuadratureConfig quad;
};

struct Table1Row {
  double tau_G = 0.0;
  long n = 0;
  double quantile_unscaled = 0.0;
  double b_n = 0.0;
  double quantile_scaled = 0.0;
  double limit_quantile = 0.0;
};

/// Rows ordered by (tau_G, n) as given in the config.
std::vector<Table1Row> compute_table1(const Table1Config& config);

/// Published infinity-column values for tau_G = 1..4, which the closed-form
/// limit does not reproduce; nullopt for other tau_G.
std::optional<double> reference_limit(double tau_G);

void cmd_table1(const Table1Config& config, Format format, std::ostream& out);

enum class CdfStatistic { M, Mu, JointMuM, Diff, Ratio };

struct CdfConfig {
  CdfStatistic statistic = CdfStatistic::M;
  long n = 1;
  int grid = 101;
  std::optional<double> upper;  ///< default: tau_H, or a 0.999 quantile of M(n) when tau_H is infinite; 5 for Ratio
  QuadratureConfig quad;
};

void cmd_cdf(const CureModel& model, const CdfConfig& config, Format format, std::ostream& out);

struct QuantileConfig {
  exact::QuantileStatistic statistic = exact::QuantileStatistic::Diff;
  std::vector<long> n{50};
  std::vector<double> probs{0.95};
  QuadratureConfig quad;
};

void cmd_quantile(const CureModel& model, const QuantileConfig& config, Format format, std::ostream& out);

struct SimulateConfig {
  long n = 50;
  long reps = 1000;
  std::uint64_t seed = 1;
  mc::ParallelOptions parallel;
};

void cmd_simulate(const CureModel& model, const SimulateConfig& config, Format format, std::ostream& out);

struct VerifySplitConfig {
  long n = 20;
  mc::Bin t_bin{0.78, 0.82};
  std::optional<mc::Bin> m_bin;
  long r = 3;
  long reps = 1000000;
  std::uint64_t seed = 1;
  mc::SplitOptions options;
};

/// Returns the report so callers can set the exit status from passed().
mc::SplitReport cmd_verify_split(const CureModel& model, const VerifySplitConfig& config, Format format,
                                 std::ostream& out);

struct FollowupConfig {
  std::string data_path;
  double alpha = 0.05;
  QuadratureConfig quad;
};

void cmd_followup(const CureModel& model, const FollowupConfig& config, Format format, std::ostream& out);

}  // namespace survmax::cli
