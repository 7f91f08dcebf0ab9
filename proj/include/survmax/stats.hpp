#pragma once

#include <functional>
#include <span>
#include <vector>

namespace survmax::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  long df = 0;  ///< degrees of freedom for chi-square tests, sample size for KS
};

/// Asymptotic Kolmogorov tail P(sqrt(n_eff) D > d), with Stephens' small-sample correction.
double kolmogorov_pvalue(double d, double n_eff);

/// One-sample KS test of `sample` against a continuous cdf. Sorts a copy.
TestResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample KS test.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double df);

/// Pearson goodness-of-fit of observed counts against probabilities summing to
/// (about) one. Cells with expected count below `min_expected` are pooled,
/// smallest first, into one cell.
TestResult chi_square_gof(std::span<const long> observed, std::span<const double> probs, double min_expected = 5.0);

/// Pearson independence test on a rows x cols table stored row-major.
TestResult chi_square_independence(std::span<const long> table, std::size_t rows, std::size_t cols);

/// Dvoretzky-Kiefer-Wolfowitz half-width for `n` draws at level 1 - alpha.
double dkw_epsilon(long n, double alpha);

/// Binomial(n, p) pmf at 0..n, evaluated outward from the mode.
std::vector<double> binomial_pmf(long n, double p);

/// Empirical quantile (inverse of the right-continuous ecdf) of a sorted sample.
double sorted_quantile(std::span<const double> sorted, double prob);

}  // namespace survmax::stats
