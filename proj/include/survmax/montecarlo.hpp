#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survmax/cure_model.hpp"

namespace survmax::mc {

using CensoredSample = std::vector<Observation>;

/// Largest times, counts and Q_n of one sample.
///
/// When no observation is uncensored, Mu = 0, n_c_gt = n and q_n = 0.
/// Otherwise n_c_gt counts censored times >= Mu, n_c_lt censored times < Mu
/// and n_u_lt the n_u - 1 other uncensored times.
struct SampleSummary {
  double M = 0.0;
  double Mu = 0.0;
  long n = 0;
  long n_u = 0;
  long n_c = 0;
  long n_c_gt = 0;
  long n_c_lt = 0;
  long n_u_lt = 0;
  long q_count = 0;  ///< uncensored times strictly above 2 Mu - M
  double q_n = 0.0;  ///< q_count / n
};

/// n draws from model.sample_one using the stream (seed, stream).
CensoredSample draw_sample(const CureModel& model, long n, std::uint64_t seed, std::uint64_t stream = 0);

SampleSummary summarize(std::span<const Observation> sample);

/// Number of worker threads used by the replication drivers; 0 means
/// hardware concurrency. Results never depend on it.
struct ParallelOptions {
  unsigned threads = 0;
};

/// Calls fn(rep, sample) for rep = 0..reps-1, replication `rep` drawing from
/// stream (seed, rep). fn runs concurrently and must only touch state owned
/// by its replication.
void for_each_replication(const CureModel& model, long n, long reps, std::uint64_t seed,
                          const std::function<void(long, std::span<const Observation>)>& fn,
                          ParallelOptions options = {});

/// Summaries of `reps` independent samples, ordered by replication index.
std::vector<SampleSummary> simulate(const CureModel& model, long n, long reps, std::uint64_t seed,
                                    ParallelOptions options = {});

enum class Statistic { M, Mu, Diff, Ratio, Qn };

/// Value of a statistic for one summary; nullopt for Ratio when Mu = 0.
std::optional<double> statistic_value(const SampleSummary& s, Statistic statistic);

/// Right-continuous empirical cdf with a simultaneous DKW band.
class EmpiricalCdf {
 public:
  EmpiricalCdf(std::vector<double> values, double confidence);

  double operator()(double x) const;
  double lower(double x) const;
  double upper(double x) const;
  /// Band half-width.
  double epsilon() const { return epsilon_; }
  double confidence() const { return confidence_; }
  long size() const { return static_cast<long>(sorted_.size()); }
  const std::vector<double>& sorted() const { return sorted_; }
  /// True when the band contains cdf at every point of `grid`.
  bool band_contains(const std::function<double(double)>& cdf, std::span<const double> grid) const;

 private:
  std::vector<double> sorted_;
  double confidence_;
  double epsilon_;
};

/// Empirical cdf of `statistic` over `reps` simulated samples (reps >= 100).
/// Ratio uses only replications with Mu > 0.
EmpiricalCdf empirical_cdf(const CureModel& model, long n, Statistic statistic, long reps, std::uint64_t seed,
                           double confidence = 0.99, ParallelOptions options = {});

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct SplitOptions {
  /// Shifts the conditioning point of the below-sample reference law; a
  /// nonzero value deliberately tests a false null.
  double null_shift = 0.0;
  /// Minimum number of qualifying replications.
  long min_qualifying = 200;
  ParallelOptions parallel;
};

/// One named test in a split report; `skipped` tests carry a note instead.
/// Informational tests are reported but do not enter the pass decision.
struct SplitTest {
  std::string name;
  bool skipped = false;
  bool informational = false;
  std::string note;
  double statistic = 0.0;
  double p_value = 1.0;
  long size = 0;
};

/// Statistical check of the sample-splitting law at M_u(n) = t.
struct SplitReport {
  Bin t_bin;
  std::optional<Bin> m_bin;
  long r = 0;
  long reps = 0;
  long qualifying = 0;
  std::vector<SplitTest> tests;
  double significance = 0.001;

  /// Smallest p-value over the gating tests that ran, times their number.
  double bonferroni_p() const;
  bool passed() const { return bonferroni_p() > significance; }
};

/// Over replications with M_u(n) in t_bin and N_c^>(M_u(n)) = r: KS of the
/// pooled below-M_u times against H(x)/H(t), KS of the pooled above-M_u times
/// against the censored-exceedance law at t, and a 3 x 3 chi-square
/// independence test between the two subsample minima. The gating KS tests
/// use the average of the conditional laws at each replication's own
/// t = M_u(n); the same tests at the bin midpoint are reported as
/// informational measures of bin-width bias.
/// Throws InsufficientDataError when fewer than min_qualifying replications qualify.
SplitReport verify_split(const CureModel& model, long n, Bin t_bin, long r, long reps, std::uint64_t seed,
                         const SplitOptions& options = {});

/// As verify_split with M(n) additionally in m_bin. The above-sample law
/// changes under this conditioning, so its KS test is replaced by a two-sample
/// KS between below-samples with M(n) in m_bin and those with M(n) outside it.
SplitReport verify_split_given_m(const CureModel& model, long n, Bin t_bin, Bin m_bin, long r, long reps,
                                 std::uint64_t seed, const SplitOptions& options = {});

/// Conditional law of one censored time above M_u(n) = t:
/// 1 - C(x, tau_H) / C(t, tau_H) for x >= t.
double censored_exceedance_cdf(const CureModel& model, double t, double x);

/// CSV with columns rep,M,Mu,n_u,n_c,n_c_gt,n_c_lt,n_u_lt,q_n.
void write_summaries_csv(std::ostream& out, std::span<const SampleSummary> summaries);

/// CSV with columns time,event (1 = uncensored), times at full precision.
void write_sample_csv(std::ostream& out, std::span<const Observation> sample);

}  // namespace survmax::mc
