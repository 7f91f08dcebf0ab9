#include "survmax/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "survmax/errors.hpp"

namespace survmax::stats {

double kolmogorov_pvalue(double d, double n_eff) {
  if (!(n_eff > 0.0)) throw DomainError("kolmogorov_pvalue: effective size must be positive");
  const double s = std::sqrt(n_eff);
  const double lambda = (s + 0.12 + 0.11 / s) * d;
  if (lambda < 0.2) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form of the Kolmogorov cdf converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      sum += std::exp(-j * j * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_one_sample: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return {d, kolmogorov_pvalue(d, n), static_cast<long>(x.size())};
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, kolmogorov_pvalue(d, na * nb / (na + nb)), static_cast<long>(x.size() + y.size())};
}

double chi_square_sf(double x, double df) {
  if (!(df > 0.0)) throw DomainError("chi_square_sf: df must be positive");
  if (!(x > 0.0)) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

TestResult chi_square_gof(std::span<const long> observed, std::span<const double> probs, double min_expected) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw DomainError("chi_square_gof: observed and probabilities differ in length");
  }
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), 0L));
  if (!(total > 0.0)) throw DomainError("chi_square_gof: no observations");

  std::vector<std::size_t> order(observed.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return probs[i] < probs[j]; });

  // Pool the smallest cells until the pooled cell and every remaining cell are large enough.
  std::vector<std::pair<double, double>> cells;  // (observed, expected)
  double pool_obs = 0.0;
  double pool_exp = 0.0;
  std::size_t next = 0;
  while (next < order.size() && (pool_exp < min_expected || total * probs[order[next]] < min_expected)) {
    pool_obs += static_cast<double>(observed[order[next]]);
    pool_exp += total * probs[order[next]];
    ++next;
  }
  for (; next < order.size(); ++next) {
    cells.emplace_back(static_cast<double>(observed[order[next]]), total * probs[order[next]]);
  }
  if (pool_exp > 0.0 || pool_obs > 0.0) cells.emplace_back(pool_obs, pool_exp);
  if (cells.size() < 2) return {0.0, 1.0, 0};

  double stat = 0.0;
  for (const auto& [o, e] : cells) {
    if (e > 0.0) {
      stat += (o - e) * (o - e) / e;
    } else if (o > 0.0) {
      return {std::numeric_limits<double>::infinity(), 0.0, static_cast<long>(cells.size() - 1)};
    }
  }
  const long df = static_cast<long>(cells.size()) - 1;
  return {stat, chi_square_sf(stat, static_cast<double>(df)), df};
}

TestResult chi_square_independence(std::span<const long> table, std::size_t rows, std::size_t cols) {
  if (table.size() != rows * cols || rows < 2 || cols < 2) throw DomainError("chi_square_independence: bad table shape");
  std::vector<double> row_sum(rows, 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double o = static_cast<double>(table[i * cols + j]);
      row_sum[i] += o;
      col_sum[j] += o;
      total += o;
    }
  }
  if (!(total > 0.0)) throw DomainError("chi_square_independence: empty table");
  double stat = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      if (e > 0.0) {
        const double o = static_cast<double>(table[i * cols + j]);
        stat += (o - e) * (o - e) / e;
      }
    }
  }
  const long df = static_cast<long>((rows - 1) * (cols - 1));
  return {stat, chi_square_sf(stat, static_cast<double>(df)), df};
}

double dkw_epsilon(long n, double alpha) {
  if (n < 1 || !(alpha > 0.0 && alpha < 1.0)) throw DomainError("dkw_epsilon: need n >= 1 and alpha in (0, 1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

std::vector<double> binomial_pmf(long n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("binomial_pmf: bad arguments n={} p={}", n, p));
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const long mode = std::min(n, static_cast<long>(std::floor((static_cast<double>(n) + 1.0) * p)));
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(mode);
  pmf[static_cast<std::size_t>(mode)] = std::exp(std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) -
                                                 std::lgamma(nd - md + 1.0) + md * std::log(p) +
                                                 (nd - md) * std::log1p(-p));
  const double odds = p / (1.0 - p);
  for (long k = mode; k < n; ++k) {
    pmf[static_cast<std::size_t>(k + 1)] =
        pmf[static_cast<std::size_t>(k)] * static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
  }
  for (long k = mode; k > 0; --k) {
    pmf[static_cast<std::size_t>(k - 1)] =
        pmf[static_cast<std::size_t>(k)] * static_cast<double>(k) / static_cast<double>(n - k + 1) / odds;
  }
  return pmf;
}

double sorted_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw DomainError("sorted_quantile: empty sample");
  const double pos = std::ceil(prob * static_cast<double>(sorted.size()));
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(sorted.size()))) - 1;
  return sorted[idx];
}

}  // namespace survmax::stats
