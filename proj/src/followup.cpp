#include "survmax/followup.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include <fmt/format.h>

#include "survmax/errors.hpp"
#include "survmax/montecarlo.hpp"
#include "survmax/stats.hpp"

namespace survmax::followup {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void require_n(long n) {
  if (n < 1) throw DomainError(fmt::format("sample size n={} must be >= 1", n));
}

double binomial_at(long trials, double prob, long j) {
  if (j < 0 || j > trials) return 0.0;
  const double lg = exact::log_choose(trials, j) + (j == 0 ? 0.0 : static_cast<double>(j) * std::log(prob)) +
                    (trials - j == 0 ? 0.0 : static_cast<double>(trials - j) * std::log1p(-prob));
  return std::isfinite(lg) ? std::exp(lg) : 0.0;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(fmt::format("{}: empty file", source), 1);
  const auto header = split_fields(line);
  const auto find_col = [&](std::string_view name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(fmt::format("{}: header lacks a '{}' column", source, name), 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t time_col = find_col("time");
  const std::size_t event_col = find_col("event");

  Dataset data;
  data.source = source;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(fmt::format("{}: row {} has {} fields, expected {}", source, line_no, fields.size(), header.size()),
                       line_no);
    }
    double time = 0.0;
    const std::string_view tf = fields[time_col];
    const auto [ptr, ec] = std::from_chars(tf.data(), tf.data() + tf.size(), time);
    if (ec != std::errc() || ptr != tf.data() + tf.size() || !std::isfinite(time)) {
      throw ParseError(fmt::format("{}: row {}: time '{}' is not a number", source, line_no, tf), line_no);
    }
    if (!(time > 0.0)) {
      throw ParseError(fmt::format("{}: row {}: time {} must be positive", source, line_no, tf), line_no);
    }
    const std::string_view ef = fields[event_col];
    if (ef != "0" && ef != "1") {
      throw ParseError(fmt::format("{}: row {}: event '{}' must be 0 or 1", source, line_no, ef), line_no);
    }
    data.records.push_back({time, ef == "1"});
  }
  if (data.records.empty()) throw ParseError(fmt::format("{}: no data rows", source), line_no);
  return data;
}

Dataset ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path), 0);
  return parse_csv(in, path);
}

double pi(const CureModel& model, double w) { return model.uncensored_mass(std::max(w, 0.0), model.tau_H()); }

double qn_conditional_pmf(const CureModel& model, long n, double t, double x, long j) {
  require_n(n);
  if (!(t > 0.0 && t <= x && x <= model.tau_H())) {
    throw DomainError(fmt::format("qn_conditional_pmf: need 0 < t <= x <= tau_H, got t={} x={}", t, x));
  }
  if (j < 0 || j > n) throw DomainError(fmt::format("qn_conditional_pmf: j={} outside [0, n]", j));
  const double w = 2.0 * t - x;
  if (w >= model.tau_H()) return j == 0 ? 1.0 : 0.0;
  return binomial_at(n, std::clamp(pi(model, w), 0.0, 1.0), j);
}

double qn_exact_conditional_pmf(const CureModel& model, long n, double t, double x, long j) {
  require_n(n);
  if (!(t > 0.0 && t <= x && x <= model.tau_H())) {
    throw DomainError(fmt::format("qn_exact_conditional_pmf: need 0 < t <= x <= tau_H, got t={} x={}", t, x));
  }
  if (j < 0 || j > n) throw DomainError(fmt::format("qn_exact_conditional_pmf: j={} outside [0, n]", j));
  if (t == x || n == 1) return j == 0 ? 1.0 : 0.0;
  const double k = model.censored_mass(0.0, x) + model.uncensored_mass(0.0, t);
  const double hit = k > 0.0 ? std::clamp(model.uncensored_mass(std::max(2.0 * t - x, 0.0), t) / k, 0.0, 1.0) : 0.0;
  return binomial_at(n - 2, hit, j - 1);
}

double QnNullDistribution::cdf_count(long j) const {
  if (j < 0) return 0.0;
  j = std::min(j, n);
  const double s = std::accumulate(pmf.begin(), pmf.begin() + j + 1, 0.0);
  return std::min(1.0, s);
}

double QnNullDistribution::cdf(double q) const {
  if (q < 0.0) return 0.0;
  return cdf_count(static_cast<long>(std::floor(static_cast<double>(n) * q + 1e-9)));
}

QnNullDistribution qn_null_distribution(const CureModel& model, long n, const QuadratureConfig& cfg) {
  require_n(n);
  cfg.validate();
  QnNullDistribution out;
  out.n = n;
  out.pmf.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.all_censored = exact::all_censored_prob(model, n);

  const double nd = static_cast<double>(n);
  const double tau_H = model.tau_H();
  const Mesh mesh = peaked_mesh(cfg, n);
  auto diag_phi = [&](double t) { return nd * pow_one_minus(model.h_sf(t), n - 1); };
  const QuadResult diag = exact::integrate_uncensored(model, diag_phi, 0.0, tau_H, cfg, mesh);
  out.diagonal = diag.value;
  out.error_estimate = diag.error;
  out.pmf[0] = out.all_censored + out.diagonal;
  if (n == 1) return out;

  const Distribution& F = model.lifetime();
  const Distribution& G = model.censoring();
  const double w_max = std::isinf(tau_H) ? 1.0 : G.cdf(tau_H);
  const double coef = nd * (nd - 1.0);
  QuadratureConfig vec_cfg = cfg;
  vec_cfg.abs_tol = std::max(cfg.abs_tol, 1e-11);

  // Inner integral over the censored maximum x > t, in w = G(x) coordinates,
  // of the conditional pmf of n Q_n - 1 weighted by the joint density.
  auto inner = [&](double t, std::span<double> acc) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const double w_lo = G.cdf(t);
    if (!(w_max > w_lo)) return;
    const double tail_u = model.j_sf(t);
    const double below_u = model.uncensored_mass(0.0, t);
    auto f = [&](double w, std::span<double> o) {
      std::fill(o.begin(), o.end(), 0.0);
      const double x = std::min(G.quantile(w), tau_H);
      const double deficit = model.censored_mass(x, tau_H) + tail_u;
      const double weight = coef * pow_one_minus(deficit, n - 2) * model.fstar_sf(x);
      if (!(weight > 0.0)) return;
      const double k = 1.0 - deficit;
      const double hit = k > 0.0 ? std::clamp(
                                       (below_u - model.uncensored_mass(0.0, std::max(2.0 * t - x, 0.0))) / k, 0.0, 1.0)
                                 : 0.0;
      const std::vector<double> b = stats::binomial_pmf(n - 2, hit);
      for (std::size_t i = 0; i < b.size(); ++i) o[i + 1] = weight * b[i];
    };
    const VectorQuadResult r = integrate_vector(f, acc.size(), w_lo, w_max, vec_cfg, mesh);
    std::copy(r.value.begin(), r.value.end(), acc.begin());
  };

  const double v_hi = std::isinf(model.tau_J()) ? 1.0 : F.cdf(model.tau_J());
  auto outer = [&](double v, std::span<double> o) {
    const double t = F.quantile(v);
    const double surv = G.sf(t);
    if (!(surv > 0.0) || !(t < tau_H)) {
      std::fill(o.begin(), o.end(), 0.0);
      return;
    }
    inner(t, o);
    const double scale = model.p() * surv;
    for (auto& e : o) e *= scale;
  };
  const VectorQuadResult region =
      integrate_vector(outer, out.pmf.size(), F.cdf(0.0), v_hi, vec_cfg, mesh);
  for (std::size_t j = 0; j < out.pmf.size(); ++j) out.pmf[j] += std::max(0.0, region.value[j]);
  out.region = std::accumulate(region.value.begin(), region.value.end(), 0.0);
  out.error_estimate += region.error;
  return out;
}

exact::CdfValue qn_null_cdf(const CureModel& model, long n, double q, const QuadratureConfig& cfg) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError(fmt::format("qn_null_cdf: q={} outside [0, 1]", q));
  const QnNullDistribution law = qn_null_distribution(model, n, cfg);
  return {law.cdf(q), law.error_estimate};
}

exact::CdfValue region_mass(const CureModel& model, long n, const QuadratureConfig& cfg) {
  require_n(n);
  const double nd = static_cast<double>(n);
  auto phi = [&](double t) {
    return nd * (pow_one_minus(model.j_sf(t), n - 1) - pow_one_minus(model.h_sf(t), n - 1));
  };
  const QuadResult r = exact::integrate_uncensored(model, phi, 0.0, model.tau_H(), cfg, peaked_mesh(cfg, n));
  return {r.value, r.error};
}

FollowupResult decide(long q_count, const QnNullDistribution& null_law, double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw MisuseError(fmt::format("alpha={} outside (0, 0.5]", alpha));
  const long n = null_law.n;
  if (q_count < 0 || q_count > n) throw DomainError(fmt::format("observed count {} outside [0, {}]", q_count, n));
  long critical = n;
  double cum = 0.0;
  for (long k = 0; k <= n; ++k) {
    cum += null_law.pmf[static_cast<std::size_t>(k)];
    if (cum >= 1.0 - alpha - 1e-12) {
      critical = k;
      break;
    }
  }
  FollowupResult res;
  res.n = n;
  res.alpha = alpha;
  res.q_observed = static_cast<double>(q_count) / static_cast<double>(n);
  res.critical_value = static_cast<double>(critical) / static_cast<double>(n);
  const double tail = std::accumulate(null_law.pmf.begin() + q_count, null_law.pmf.end(), 0.0);
  res.p_value_bound = q_count == 0 ? 1.0 : std::clamp(tail, 0.0, 1.0);
  res.decision = q_count > critical ? Decision::RejectH0 : Decision::FailToReject;
  return res;
}

FollowupResult test_sufficient_followup(const Dataset& data, const CureModel& null_model, double alpha,
                                        const QuadratureConfig& cfg) {
  if (!(null_model.tau_G() < null_model.tau_F())) {
    throw MisuseError(fmt::format("null model must satisfy tau_G < tau_F (got tau_G={}, tau_F={})",
                                  null_model.tau_G(), null_model.tau_F()));
  }
  if (!(alpha > 0.0 && alpha <= 0.5)) throw MisuseError(fmt::format("alpha={} outside (0, 0.5]", alpha));
  if (data.records.empty()) throw DomainError("test_sufficient_followup: empty dataset");
  const mc::SampleSummary s = mc::summarize(data.records);
  const QnNullDistribution law = qn_null_distribution(null_model, s.n, cfg);
  FollowupResult res = decide(s.q_count, law, alpha);
  res.null_model = null_model.describe();
  return res;
}

std::string to_string(Decision decision) {
  return decision == Decision::RejectH0 ? "reject-H0" : "fail-to-reject";
}

}  // namespace survmax::followup
