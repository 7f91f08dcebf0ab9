#include "survmax/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iterator>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "survmax/errors.hpp"
#include "survmax/stats.hpp"

namespace survmax::mc {

namespace {

constexpr long kChunks = 256;

unsigned worker_count(ParallelOptions options) {
  unsigned t = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  return std::max(1u, t);
}

// Runs fn(begin, end) over a fixed partition of [0, reps) and returns the
// per-chunk results in chunk order, so the output does not depend on the
// number of workers.
template <class Fn>
auto map_chunks(long reps, ParallelOptions options, Fn fn) -> std::vector<decltype(fn(0L, 0L))> {
  const long chunks = std::max(1L, std::min(reps, kChunks));
  std::vector<decltype(fn(0L, 0L))> results(static_cast<std::size_t>(chunks));
  std::atomic<long> next{0};
  auto work = [&] {
    for (long c = next++; c < chunks; c = next++) {
      const long begin = reps * c / chunks;
      const long end = reps * (c + 1) / chunks;
      results[static_cast<std::size_t>(c)] = fn(begin, end);
    }
  };
  const unsigned threads = std::min<unsigned>(worker_count(options), static_cast<unsigned>(chunks));
  if (threads <= 1) {
    work();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
  pool.clear();
  return results;
}

void fill_sample(const CureModel& model, Rng& rng, CensoredSample& sample) {
  for (auto& obs : sample) obs = model.sample_one(rng);
}

void require_reps(long n, long reps) {
  if (n < 1) throw DomainError(fmt::format("sample size n={} must be >= 1", n));
  if (reps < 1) throw DomainError(fmt::format("reps={} must be >= 1", reps));
}

}  // namespace

CensoredSample draw_sample(const CureModel& model, long n, std::uint64_t seed, std::uint64_t stream) {
  if (n < 1) throw DomainError(fmt::format("sample size n={} must be >= 1", n));
  Rng rng(seed, stream);
  CensoredSample sample(static_cast<std::size_t>(n));
  fill_sample(model, rng, sample);
  return sample;
}

SampleSummary summarize(std::span<const Observation> sample) {
  if (sample.empty()) throw DomainError("summarize: empty sample");
  SampleSummary s;
  s.n = static_cast<long>(sample.size());
  for (const auto& obs : sample) {
    s.M = std::max(s.M, obs.time);
    if (obs.uncensored) {
      ++s.n_u;
      s.Mu = std::max(s.Mu, obs.time);
    }
  }
  s.n_c = s.n - s.n_u;
  if (s.n_u == 0) {
    s.n_c_gt = s.n;
    return s;
  }
  s.n_u_lt = s.n_u - 1;
  const double threshold = 2.0 * s.Mu - s.M;
  for (const auto& obs : sample) {
    if (obs.uncensored) {
      if (obs.time > threshold) ++s.q_count;
    } else if (obs.time < s.Mu) {
      ++s.n_c_lt;
    } else {
      ++s.n_c_gt;
    }
  }
  s.q_n = static_cast<double>(s.q_count) / static_cast<double>(s.n);
  return s;
}

void for_each_replication(const CureModel& model, long n, long reps, std::uint64_t seed,
                          const std::function<void(long, std::span<const Observation>)>& fn,
                          ParallelOptions options) {
  require_reps(n, reps);
  map_chunks(reps, options, [&](long begin, long end) {
    CensoredSample sample(static_cast<std::size_t>(n));
    for (long rep = begin; rep < end; ++rep) {
      Rng rng(seed, static_cast<std::uint64_t>(rep));
      fill_sample(model, rng, sample);
      fn(rep, sample);
    }
    return 0;
  });
}

std::vector<SampleSummary> simulate(const CureModel& model, long n, long reps, std::uint64_t seed,
                                    ParallelOptions options) {
  require_reps(n, reps);
  std::vector<SampleSummary> out(static_cast<std::size_t>(reps));
  for_each_replication(
      model, n, reps, seed,
      [&](long rep, std::span<const Observation> sample) { out[static_cast<std::size_t>(rep)] = summarize(sample); },
      options);
  return out;
}

std::optional<double> statistic_value(const SampleSummary& s, Statistic statistic) {
  switch (statistic) {
    case Statistic::M:
      return s.M;
    case Statistic::Mu:
      return s.Mu;
    case Statistic::Diff:
      return s.M - s.Mu;
    case Statistic::Ratio:
      if (!(s.Mu > 0.0)) return std::nullopt;
      return s.M / s.Mu;
    case Statistic::Qn:
      return s.q_n;
  }
  return std::nullopt;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> values, double confidence)
    : sorted_(std::move(values)), confidence_(confidence) {
  if (sorted_.empty()) throw InsufficientDataError("empirical cdf of an empty sample", 0);
  std::sort(sorted_.begin(), sorted_.end());
  epsilon_ = stats::dkw_epsilon(static_cast<long>(sorted_.size()), 1.0 - confidence);
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::lower(double x) const { return std::max(0.0, (*this)(x) - epsilon_); }
double EmpiricalCdf::upper(double x) const { return std::min(1.0, (*this)(x) + epsilon_); }

bool EmpiricalCdf::band_contains(const std::function<double(double)>& cdf, std::span<const double> grid) const {
  return std::all_of(grid.begin(), grid.end(), [&](double x) {
    const double f = cdf(x);
    return f >= lower(x) && f <= upper(x);
  });
}

EmpiricalCdf empirical_cdf(const CureModel& model, long n, Statistic statistic, long reps, std::uint64_t seed,
                           double confidence, ParallelOptions options) {
  if (reps < 100) throw DomainError(fmt::format("empirical_cdf: reps={} must be >= 100", reps));
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("empirical_cdf: confidence outside (0, 1)");
  const std::vector<SampleSummary> summaries = simulate(model, n, reps, seed, options);
  std::vector<double> values;
  values.reserve(summaries.size());
  for (const auto& s : summaries) {
    if (const auto v = statistic_value(s, statistic)) values.push_back(*v);
  }
  if (values.empty()) throw InsufficientDataError("empirical_cdf: no replication defines the statistic", 0);
  return EmpiricalCdf(std::move(values), confidence);
}

double censored_exceedance_cdf(const CureModel& model, double t, double x) {
  if (x <= t) return 0.0;
  const double tau_H = model.tau_H();
  const double total = model.censored_mass(t, tau_H);
  if (!(total > 0.0)) throw DegenerateModelError("censored_exceedance_cdf: no censored mass above t");
  return std::clamp(1.0 - model.censored_mass(x, tau_H) / total, 0.0, 1.0);
}

double SplitReport::bonferroni_p() const {
  double min_p = 1.0;
  long count = 0;
  for (const auto& t : tests) {
    if (t.skipped || t.informational) continue;
    min_p = std::min(min_p, t.p_value);
    ++count;
  }
  return count == 0 ? 1.0 : std::min(1.0, min_p * static_cast<double>(count));
}

namespace {

struct Qualifying {
  double t = 0.0;
  double M = 0.0;
  std::vector<double> below;
  std::vector<double> above;
};

struct SplitCollection {
  std::vector<Qualifying> inside;   // M(n) in m_bin (or no m_bin)
  std::vector<double> below_outside;  // below-times of replications with M(n) outside m_bin
};

SplitCollection collect(const CureModel& model, long n, Bin t_bin, std::optional<Bin> m_bin, long r, long reps,
                        std::uint64_t seed, ParallelOptions options) {
  auto chunks = map_chunks(reps, options, [&](long begin, long end) {
    SplitCollection local;
    CensoredSample sample(static_cast<std::size_t>(n));
    for (long rep = begin; rep < end; ++rep) {
      Rng rng(seed, static_cast<std::uint64_t>(rep));
      fill_sample(model, rng, sample);
      const SampleSummary s = summarize(sample);
      if (s.n_u == 0 || s.n_c_gt != r || !t_bin.contains(s.Mu)) continue;
      Qualifying q{s.Mu, s.M, {}, {}};
      bool seen_max = false;
      for (const auto& obs : sample) {
        if (obs.uncensored && obs.time == s.Mu && !seen_max) {
          seen_max = true;
        } else if (obs.time < s.Mu || obs.uncensored) {
          q.below.push_back(obs.time);
        } else {
          q.above.push_back(obs.time);
        }
      }
      if (!m_bin || m_bin->contains(s.M)) {
        local.inside.push_back(std::move(q));
      } else {
        local.below_outside.insert(local.below_outside.end(), q.below.begin(), q.below.end());
      }
    }
    return local;
  });
  SplitCollection all;
  for (auto& c : chunks) {
    std::move(c.inside.begin(), c.inside.end(), std::back_inserter(all.inside));
    all.below_outside.insert(all.below_outside.end(), c.below_outside.begin(), c.below_outside.end());
  }
  return all;
}

void validate_split_args(const CureModel& model, long n, Bin t_bin, long r, long reps) {
  require_reps(n, reps);
  if (!(t_bin.lo > 0.0 && t_bin.lo < t_bin.hi && t_bin.hi < model.tau_H())) {
    throw DomainError(fmt::format("t_bin ({}, {}) must lie inside (0, tau_H={})", t_bin.lo, t_bin.hi, model.tau_H()));
  }
  if (r < 0 || r > n - 1) throw DomainError(fmt::format("r={} outside [0, n-1]", r));
}

SplitTest skipped(std::string name, std::string note) {
  SplitTest t;
  t.name = std::move(name);
  t.skipped = true;
  t.note = std::move(note);
  return t;
}

SplitTest from_result(std::string name, const stats::TestResult& res) {
  SplitTest t;
  t.name = std::move(name);
  t.statistic = res.statistic;
  t.p_value = res.p_value;
  t.size = res.df;
  return t;
}

SplitTest informational(SplitTest t) {
  t.informational = true;
  return t;
}

// Average over replications of the below-sample law H(x)/H(ref_i), clamped at 1:
// (#{ref_i <= x} + H(x) * sum_{ref_i > x} 1/H(ref_i)) / N.
class BelowMixture {
 public:
  BelowMixture(const CureModel& model, std::vector<double> refs) : model_(model), refs_(std::move(refs)) {
    std::sort(refs_.begin(), refs_.end());
    suffix_.assign(refs_.size() + 1, 0.0);
    for (std::size_t i = refs_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + 1.0 / model_.h_cdf(refs_[i]);
  }
  double operator()(double x) const {
    const auto idx = static_cast<std::size_t>(std::upper_bound(refs_.begin(), refs_.end(), x) - refs_.begin());
    const double n = static_cast<double>(refs_.size());
    return std::clamp((static_cast<double>(idx) + model_.h_cdf(x) * suffix_[idx]) / n, 0.0, 1.0);
  }

 private:
  const CureModel& model_;
  std::vector<double> refs_;
  std::vector<double> suffix_;
};

// Average of 1 - C(x, tau_H)/C(t_i, tau_H) over t_i < x.
class AboveMixture {
 public:
  AboveMixture(const CureModel& model, std::vector<double> refs) : model_(model), refs_(std::move(refs)) {
    std::sort(refs_.begin(), refs_.end());
    prefix_.assign(refs_.size() + 1, 0.0);
    const double tau_H = model_.tau_H();
    for (std::size_t i = 0; i < refs_.size(); ++i) {
      const double c = model_.censored_mass(refs_[i], tau_H);
      if (!(c > 0.0)) throw DegenerateModelError("censored exceedance law undefined: no censored mass above t");
      prefix_[i + 1] = prefix_[i] + 1.0 / c;
    }
  }
  double operator()(double x) const {
    const auto idx = static_cast<std::size_t>(std::lower_bound(refs_.begin(), refs_.end(), x) - refs_.begin());
    const double n = static_cast<double>(refs_.size());
    const double c = model_.censored_mass(x, model_.tau_H());
    return std::clamp((static_cast<double>(idx) - c * prefix_[idx]) / n, 0.0, 1.0);
  }

 private:
  const CureModel& model_;
  std::vector<double> refs_;
  std::vector<double> prefix_;
};

std::vector<double> pooled_below(const std::vector<Qualifying>& reps) {
  std::vector<double> pooled;
  for (const auto& q : reps) pooled.insert(pooled.end(), q.below.begin(), q.below.end());
  return pooled;
}

std::vector<SplitTest> below_ks(const CureModel& model, const std::vector<Qualifying>& reps, double t_mid,
                                double shift) {
  const std::vector<double> pooled = pooled_below(reps);
  if (pooled.empty()) return {skipped("below_ks", "no observations below M_u")};
  std::vector<double> refs;
  for (const auto& q : reps) refs.push_back(q.t + shift);
  const BelowMixture mixture(model, std::move(refs));
  const double h_mid = model.h_cdf(t_mid + shift);
  auto mid_cdf = [&](double x) { return std::clamp(model.h_cdf(x) / h_mid, 0.0, 1.0); };
  return {from_result("below_ks", stats::ks_one_sample(pooled, mixture)),
          informational(from_result("below_ks_midpoint", stats::ks_one_sample(pooled, mid_cdf)))};
}

std::vector<SplitTest> above_ks(const CureModel& model, const std::vector<Qualifying>& reps, long r, double t_mid) {
  if (r == 0) return {skipped("above_ks", "r=0 => M_u = M, no censored times above M_u")};
  std::vector<double> pooled;
  std::vector<double> refs;
  for (const auto& q : reps) {
    pooled.insert(pooled.end(), q.above.begin(), q.above.end());
    refs.push_back(q.t);
  }
  const AboveMixture mixture(model, std::move(refs));
  auto mid_cdf = [&](double x) { return censored_exceedance_cdf(model, t_mid, x); };
  return {from_result("above_ks", stats::ks_one_sample(pooled, mixture)),
          informational(from_result("above_ks_midpoint", stats::ks_one_sample(pooled, mid_cdf)))};
}

// Minima of the two subsamples, each mapped through its conditional cdf at the
// replication's own M_u so that spread of M_u inside the bin does not couple them.
SplitTest independence(const CureModel& model, const std::vector<Qualifying>& reps, long n, long r) {
  const long below_size = n - 1 - r;
  if (r == 0) return skipped("independence_chi2", "r=0 => above-sample empty");
  if (below_size == 0) return skipped("independence_chi2", "below-sample empty");
  std::vector<long> table(9, 0);
  auto tercile = [](double u) { return u < 1.0 / 3.0 ? 0 : (u < 2.0 / 3.0 ? 1 : 2); };
  for (const auto& q : reps) {
    const double min_below = *std::min_element(q.below.begin(), q.below.end());
    const double min_above = *std::min_element(q.above.begin(), q.above.end());
    const double fb = std::clamp(model.h_cdf(min_below) / model.h_cdf(q.t), 0.0, 1.0);
    const double fa = censored_exceedance_cdf(model, q.t, min_above);
    const double ub = -std::expm1(static_cast<double>(below_size) * std::log1p(-std::min(fb, 1.0 - 1e-16)));
    const double ua = -std::expm1(static_cast<double>(r) * std::log1p(-std::min(fa, 1.0 - 1e-16)));
    ++table[static_cast<std::size_t>(tercile(ub) * 3 + tercile(ua))];
  }
  return from_result("independence_chi2", stats::chi_square_independence(table, 3, 3));
}

}  // namespace

SplitReport verify_split(const CureModel& model, long n, Bin t_bin, long r, long reps, std::uint64_t seed,
                         const SplitOptions& options) {
  validate_split_args(model, n, t_bin, r, reps);
  SplitCollection data = collect(model, n, t_bin, std::nullopt, r, reps, seed, options.parallel);
  const long qualifying = static_cast<long>(data.inside.size());
  if (qualifying < options.min_qualifying) {
    throw InsufficientDataError(fmt::format("verify_split: only {} of {} replications qualify (need {})", qualifying,
                                            reps, options.min_qualifying),
                                qualifying);
  }
  SplitReport report;
  report.t_bin = t_bin;
  report.r = r;
  report.reps = reps;
  report.qualifying = qualifying;
  for (auto& t : below_ks(model, data.inside, t_bin.mid(), options.null_shift)) report.tests.push_back(std::move(t));
  for (auto& t : above_ks(model, data.inside, r, t_bin.mid())) report.tests.push_back(std::move(t));
  report.tests.push_back(independence(model, data.inside, n, r));
  return report;
}

SplitReport verify_split_given_m(const CureModel& model, long n, Bin t_bin, Bin m_bin, long r, long reps,
                                 std::uint64_t seed, const SplitOptions& options) {
  validate_split_args(model, n, t_bin, r, reps);
  if (!(m_bin.lo < m_bin.hi && m_bin.hi >= t_bin.lo)) throw DomainError("m_bin must be a nonempty interval above t_bin");
  SplitCollection data = collect(model, n, t_bin, m_bin, r, reps, seed, options.parallel);
  const long qualifying = static_cast<long>(data.inside.size());
  if (qualifying < options.min_qualifying) {
    throw InsufficientDataError(fmt::format("verify_split_given_m: only {} of {} replications qualify (need {})",
                                            qualifying, reps, options.min_qualifying),
                                qualifying);
  }
  SplitReport report;
  report.t_bin = t_bin;
  report.m_bin = m_bin;
  report.r = r;
  report.reps = reps;
  report.qualifying = qualifying;
  for (auto& t : below_ks(model, data.inside, t_bin.mid(), options.null_shift)) report.tests.push_back(std::move(t));
  report.tests.push_back(skipped("above_ks", "law of the above-sample changes when M(n) is conditioned on"));
  report.tests.push_back(independence(model, data.inside, n, r));
  if (data.below_outside.empty()) {
    report.tests.push_back(skipped("below_two_sample_ks", "no qualifying replication has M(n) outside m_bin"));
  } else {
    const std::vector<double> inside = pooled_below(data.inside);
    if (inside.empty()) {
      report.tests.push_back(skipped("below_two_sample_ks", "below-sample empty"));
    } else {
      report.tests.push_back(from_result("below_two_sample_ks", stats::ks_two_sample(inside, data.below_outside)));
    }
  }
  return report;
}

void write_summaries_csv(std::ostream& out, std::span<const SampleSummary> summaries) {
  out << "rep,M,Mu,n_u,n_c,n_c_gt,n_c_lt,n_u_lt,q_n\n";
  long rep = 0;
  for (const auto& s : summaries) {
    out << fmt::format("{},{:.17g},{:.17g},{},{},{},{},{},{:.17g}\n", rep++, s.M, s.Mu, s.n_u, s.n_c, s.n_c_gt,
                       s.n_c_lt, s.n_u_lt, s.q_n);
  }
}

void write_sample_csv(std::ostream& out, std::span<const Observation> sample) {
  out << "time,event\n";
  for (const auto& obs : sample) out << fmt::format("{:.17g},{}\n", obs.time, obs.uncensored ? 1 : 0);
}

}  // namespace survmax::mc
