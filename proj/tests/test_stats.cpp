#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "survmax/errors.hpp"
#include "survmax/stats.hpp"

using namespace survmax;
using namespace survmax::stats;

// Reference values from an independent statistics library.
TEST(Stats, KolmogorovTailMatchesReference) {
  const double big = 1e12;
  EXPECT_NEAR(kolmogorov_pvalue(1.0 / std::sqrt(big), big), 0.26999967167735456, 1e-6);
  EXPECT_NEAR(kolmogorov_pvalue(1.36 / std::sqrt(big), big), 0.049485876755377876, 1e-6);
  EXPECT_NEAR(kolmogorov_pvalue(0.5 / std::sqrt(big), big), 0.9639452436648751, 1e-6);
  EXPECT_EQ(kolmogorov_pvalue(0.0, 10.0), 1.0);
  EXPECT_THROW(kolmogorov_pvalue(0.1, 0.0), DomainError);
}

TEST(Stats, ChiSquareTail) {
  EXPECT_NEAR(chi_square_sf(3.84, 1), 0.05004352124870519, 1e-12);
  EXPECT_NEAR(chi_square_sf(10.0, 4), 0.04042768199451279, 1e-12);
  EXPECT_NEAR(chi_square_sf(100.0, 80), 0.064570368921133, 1e-12);
}

TEST(Stats, GoodnessOfFitAndIndependence) {
  const std::vector<long> obs{10, 20, 30, 40};
  const std::vector<double> probs(4, 0.25);
  const TestResult g = chi_square_gof(obs, probs);
  EXPECT_NEAR(g.statistic, 20.0, 1e-12);
  EXPECT_EQ(g.df, 3);
  EXPECT_NEAR(g.p_value, 0.00016974243555282632, 1e-12);

  const std::vector<long> table{10, 20, 30, 40};
  const TestResult ind = chi_square_independence(table, 2, 2);
  EXPECT_NEAR(ind.statistic, 0.7936507936507936, 1e-12);
  EXPECT_EQ(ind.df, 1);
  EXPECT_NEAR(ind.p_value, 0.37299848361348686, 1e-10);
}

TEST(Stats, GoodnessOfFitPoolsSparseCells) {
  const std::vector<long> obs{50, 45, 3, 2};
  const std::vector<double> probs{0.5, 0.42, 0.04, 0.04};
  const TestResult g = chi_square_gof(obs, probs);
  EXPECT_EQ(g.df, 2);
}

TEST(Stats, KsOneAndTwoSample) {
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000.0);
  const TestResult r = ks_one_sample(grid, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_NEAR(r.statistic, 0.0005, 1e-12);
  EXPECT_GT(r.p_value, 0.99);
  const TestResult bad = ks_one_sample(grid, [](double x) { return std::clamp(x * x, 0.0, 1.0); });
  EXPECT_LT(bad.p_value, 1e-10);

  std::vector<double> shifted;
  for (double x : grid) shifted.push_back(x + 0.2);
  EXPECT_NEAR(ks_two_sample(grid, shifted).statistic, 0.2, 1.5e-3);
  EXPECT_NEAR(ks_two_sample(grid, grid).statistic, 0.0, 1e-15);
  EXPECT_THROW(ks_two_sample(grid, std::vector<double>{}), DomainError);
}

TEST(Stats, DkwAndBinomial) {
  EXPECT_NEAR(dkw_epsilon(1000000, 0.001), std::sqrt(std::log(2000.0) / 2e6), 1e-15);
  const std::vector<double> pmf = binomial_pmf(10, 0.3);
  double total = 0.0;
  for (double v : pmf) total += v;
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_NEAR(pmf[3], 120 * std::pow(0.3, 3) * std::pow(0.7, 7), 1e-14);
  EXPECT_EQ(binomial_pmf(4, 0.0)[0], 1.0);
  EXPECT_EQ(binomial_pmf(4, 1.0)[4], 1.0);
  const std::vector<double> big = binomial_pmf(100000, 0.01);
  EXPECT_NEAR(big[1000], 0.012678161323544586, 1e-10);
}

TEST(Stats, SortedQuantile) {
  const std::vector<double> s{1, 2, 3, 4};
  EXPECT_EQ(sorted_quantile(s, 0.25), 1.0);
  EXPECT_EQ(sorted_quantile(s, 0.26), 2.0);
  EXPECT_EQ(sorted_quantile(s, 1.0), 4.0);
}
