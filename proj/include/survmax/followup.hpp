#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "survmax/cure_model.hpp"
#include "survmax/exact.hpp"
#include "survmax/quadrature.hpp"

namespace survmax::followup {

/// Observed (time, uncensored) records and where they came from.
struct Dataset {
  std::vector<Observation> records;
  std::string source;
};

/// Reads CSV with a header naming columns `time` and `event` (1 = event
/// observed, 0 = censored); other columns are ignored. Throws ParseError with
/// the 1-based line number (header = line 1).
Dataset parse_csv(std::istream& in, const std::string& source);
Dataset ingest_csv(const std::string& path);

/// U(max(w, 0), tau_H): probability that one observation is uncensored with
/// time above w.
double pi(const CureModel& model, double w);

/// Binomial(n, pi(2t - x)) pmf at j, for 0 < t <= x <= tau_H.
double qn_conditional_pmf(const CureModel& model, long n, double t, double x, long j);

/// Exact conditional pmf of n Q_n at j given M_u(n) = t and M(n) = x.
/// For t < x the maximum uncensored time always counts, the censored maximum
/// never does, and each of the other n - 2 points counts independently with
/// probability U(max(2t - x, 0), t) / (C(0, x) + U(0, t)). For t = x, Q_n = 0.
double qn_exact_conditional_pmf(const CureModel& model, long n, double t, double x, long j);

/// Null law of n Q_n on 0..n with its decomposition by event.
struct QnNullDistribution {
  long n = 0;
  std::vector<double> pmf;  ///< P(n Q_n = j), j = 0..n
  double all_censored = 0.0;  ///< P(M_u(n) = 0)
  double diagonal = 0.0;      ///< P(0 < M_u(n) = M(n))
  double region = 0.0;        ///< P(0 < M_u(n) < M(n)), summed from the 2-D integral
  double error_estimate = 0.0;

  /// P(Q_n <= q) using j = floor(n q).
  double cdf(double q) const;
  /// P(n Q_n <= j).
  double cdf_count(long j) const;
};

QnNullDistribution qn_null_distribution(const CureModel& model, long n, const QuadratureConfig& cfg = {});

exact::CdfValue qn_null_cdf(const CureModel& model, long n, double q, const QuadratureConfig& cfg = {});

/// n int (J^{n-1} - H^{n-1}) dJ: the mass of {0 < M_u(n) < M(n)} from the
/// one-dimensional marginal, used as a check on the 2-D integral.
exact::CdfValue region_mass(const CureModel& model, long n, const QuadratureConfig& cfg = {});

enum class Decision { RejectH0, FailToReject };

struct FollowupResult {
  long n = 0;
  double q_observed = 0.0;
  double critical_value = 0.0;
  double p_value_bound = 1.0;
  double alpha = 0.05;
  Decision decision = Decision::FailToReject;
  std::string null_model;
};

/// Decision from an observed count against a precomputed null law.
FollowupResult decide(long q_count, const QnNullDistribution& null_law, double alpha);

/// Tests H0: tau_G < tau_F. Rejection means follow-up is sufficient. Throws
/// MisuseError when the null model is not in H0 or alpha is outside (0, 0.5].
FollowupResult test_sufficient_followup(const Dataset& data, const CureModel& null_model, double alpha,
                                        const QuadratureConfig& cfg = {});

std::string to_string(Decision decision);

}  // namespace survmax::followup
