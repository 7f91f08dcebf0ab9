#include "survmax/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "survmax/errors.hpp"

namespace survmax::exact {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_n(long n) {
  if (n < 1) throw DomainError(fmt::format("sample size n={} must be >= 1", n));
}

// k log(x), with 0 log 0 = 0.
double xlog(long k, double x) {
  if (k == 0) return 0.0;
  return x > 0.0 ? static_cast<double>(k) * std::log(x) : kNegInf;
}

// k log1p(-d), with the same convention.
double xlog1m(long k, double deficit) {
  if (k == 0) return 0.0;
  return deficit < 1.0 ? static_cast<double>(k) * std::log1p(-std::max(deficit, 0.0)) : kNegInf;
}

double finite_upper(const CureModel& model, const Integrand& cdf, double prob) {
  double hi = model.tau_H();
  if (std::isfinite(hi)) return hi;
  hi = 1.0;
  for (int i = 0; i < 200 && cdf(hi) < prob; ++i) hi *= 2.0;
  return hi;
}

}  // namespace

double log_choose(long n, long k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

QuadResult integrate_uncensored(const CureModel& model, const Integrand& phi, double t_lo, double t_hi,
                                const QuadratureConfig& cfg, Mesh mesh) {
  const Distribution& F = model.lifetime();
  const Distribution& G = model.censoring();
  t_lo = std::max(t_lo, 0.0);
  t_hi = std::min(t_hi, model.tau_J());
  if (!(t_hi > t_lo)) return {};
  const double v_lo = F.cdf(t_lo);
  const double v_hi = std::isinf(t_hi) ? 1.0 : F.cdf(t_hi);
  if (!(v_hi > v_lo)) return {};
  auto integrand = [&](double v) {
    const double t = F.quantile(v);
    const double surv = G.sf(t);
    if (surv <= 0.0) return 0.0;
    return phi(t) * surv;
  };
  QuadResult res = integrate(integrand, v_lo, v_hi, cfg, mesh);
  res.value *= model.p();
  res.error *= model.p();
  return res;
}

CdfValue joint_mu_ncgt(const CureModel& model, long n, double t, long r, const QuadratureConfig& cfg) {
  require_n(n);
  if (!(t >= 0.0 && t <= model.tau_H())) {
    throw DomainError(fmt::format("joint_mu_ncgt: t={} outside [0, tau_H]", t));
  }
  if (r < 0 || r > n - 1) throw DomainError(fmt::format("joint_mu_ncgt: r={} outside [0, n-1]", r));
  const double log_coef = std::log(static_cast<double>(n)) + log_choose(n - 1, r);
  const double tau_H = model.tau_H();
  auto phi = [&](double y) {
    const double lg = log_coef + xlog(r, model.censored_mass(y, tau_H)) + xlog1m(n - r - 1, model.h_sf(y));
    return lg == kNegInf ? 0.0 : std::exp(lg);
  };
  const QuadResult res = integrate_uncensored(model, phi, 0.0, t, cfg, peaked_mesh(cfg, n));
  return {res.value, res.error};
}

CdfValue joint_mu_m(const CureModel& model, long n, double t, double x) {
  require_n(n);
  if (t < 0.0 || x < 0.0) return {0.0, 0.0};
  const double tau_H = model.tau_H();
  t = std::min(t, tau_H);
  x = std::min(x, tau_H);
  if (t == 0.0) return {log_pow_integrand_guard(model.censored_mass(0.0, x), n), 0.0};
  if (x <= t) return {pow_one_minus(model.h_sf(x), n), 0.0};
  // (C(t, x) + H(t))^n, with deficit C(x, tau_H) + U(t, tau_H)
  const double deficit = model.censored_mass(x, tau_H) + model.j_sf(t);
  return {pow_one_minus(deficit, n), 0.0};
}

CdfValue mu_cdf(const CureModel& model, long n, double t) {
  require_n(n);
  if (t < 0.0) return {0.0, 0.0};
  if (t == 0.0) return {log_pow_integrand_guard(model.censored_total(), n), 0.0};
  return {pow_one_minus(model.j_sf(t), n), 0.0};
}

CdfValue m_cdf(const CureModel& model, long n, double x) {
  require_n(n);
  if (x < 0.0) return {0.0, 0.0};
  return {pow_one_minus(model.h_sf(x), n), 0.0};
}

CdfValue diff_cdf(const CureModel& model, long n, double u, const QuadratureConfig& cfg) {
  require_n(n);
  if (u < 0.0) return {0.0, 0.0};
  const double tau_H = model.tau_H();
  if (u >= tau_H) return {1.0, 0.0};
  const double nd = static_cast<double>(n);
  auto phi = [&](double t) {
    const double deficit = model.censored_mass(std::min(t + u, tau_H), tau_H) + model.j_sf(t);
    return nd * pow_one_minus(deficit, n - 1);
  };
  const QuadResult res = integrate_uncensored(model, phi, 0.0, tau_H, cfg, peaked_mesh(cfg, n));
  const double all_censored = log_pow_integrand_guard(model.censored_mass(0.0, u), n);
  return {res.value + all_censored, res.error};
}

CdfValue diff_atom(const CureModel& model, long n, const QuadratureConfig& cfg) {
  return diff_cdf(model, n, 0.0, cfg);
}

CdfValue uncensored_total_mass(const CureModel& model, long n, const QuadratureConfig& cfg) {
  require_n(n);
  const double nd = static_cast<double>(n);
  auto phi = [&](double t) { return nd * pow_one_minus(model.j_sf(t), n - 1); };
  const QuadResult res = integrate_uncensored(model, phi, 0.0, model.tau_H(), cfg, peaked_mesh(cfg, n));
  return {res.value, res.error};
}

CdfValue ratio_cdf(const CureModel& model, long n, double v, const QuadratureConfig& cfg) {
  require_n(n);
  if (v < 1.0) return {0.0, 0.0};
  const double tau_H = model.tau_H();
  const Mesh mesh = peaked_mesh(cfg, n);
  auto denom_phi = [&](double t) { return pow_one_minus(model.j_sf(t), n - 1); };
  const QuadResult denom = integrate_uncensored(model, denom_phi, 0.0, tau_H, cfg, mesh);
  if (!(denom.value > 1e-300)) {
    throw DegenerateModelError("ratio_cdf: P(M_u(n) > 0) is numerically zero");
  }
  if (std::isinf(v)) return {1.0, 0.0};
  auto num_phi = [&](double t) {
    const double deficit = model.censored_mass(std::min(t * v, tau_H), tau_H) + model.j_sf(t);
    return pow_one_minus(deficit, n - 1);
  };
  const QuadResult num = integrate_uncensored(model, num_phi, 0.0, tau_H, cfg, mesh);
  const double value = num.value / denom.value;
  const double err = (num.error + value * denom.error) / denom.value;
  return {value, err};
}

double all_censored_prob(const CureModel& model, long n) {
  require_n(n);
  return log_pow_integrand_guard(model.censored_total(), n);
}

double counts_pmf(const CureModel& model, long n, double t, long r, long s, long k) {
  require_n(n);
  if (r < 0 || s < 0 || k < 0 || r + s + k != n - 1) {
    throw DomainError(fmt::format("counts_pmf: need r+s+k = n-1 with nonnegative counts, got ({}, {}, {})", r, s, k));
  }
  const PFunctions pf = model.p_functions(t);
  const double lg = std::lgamma(static_cast<double>(n)) - std::lgamma(r + 1.0) - std::lgamma(s + 1.0) -
                    std::lgamma(k + 1.0) + xlog(r, pf.censored_above) + xlog(s, pf.censored_below) +
                    xlog(k, pf.uncensored_below);
  return lg == kNegInf ? 0.0 : std::exp(lg);
}

std::size_t cell_index(long n, long r, long s) {
  return static_cast<std::size_t>(r * n - r * (r - 1) / 2 + s);
}

std::vector<double> counts_joint_cells(const CureModel& model, long n, double t_lo, double t_hi,
                                       const QuadratureConfig& cfg) {
  require_n(n);
  const double tau_H = model.tau_H();
  if (!(t_lo >= 0.0 && t_lo < t_hi && t_hi <= tau_H)) {
    throw DomainError("counts_joint_cells: need 0 <= t_lo < t_hi <= tau_H");
  }
  const std::size_t cells = static_cast<std::size_t>(n * (n + 1) / 2);
  std::vector<double> log_fact(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) log_fact[static_cast<std::size_t>(i)] = std::lgamma(i + 1.0);
  const Distribution& F = model.lifetime();
  const Distribution& G = model.censoring();
  const double log_n = std::log(static_cast<double>(n));

  auto integrand = [&](double v, std::span<double> out) {
    const double t = F.quantile(v);
    const double surv = G.sf(t);
    const double above = model.censored_mass(t, tau_H);
    const double below_c = model.censored_mass(0.0, t);
    const double below_u = model.uncensored_mass(0.0, t);
    const double base = log_n + log_fact[static_cast<std::size_t>(n - 1)] + std::log(model.p() * surv);
    for (long r = 0; r < n; ++r) {
      for (long s = 0; r + s < n; ++s) {
        const long k = n - 1 - r - s;
        double lg = base - log_fact[static_cast<std::size_t>(r)] - log_fact[static_cast<std::size_t>(s)] -
                    log_fact[static_cast<std::size_t>(k)] + xlog(r, above) + xlog(s, below_c) + xlog(k, below_u);
        out[cell_index(n, r, s)] = (surv > 0.0 && lg != kNegInf) ? std::exp(lg) : 0.0;
      }
    }
  };
  const double v_lo = F.cdf(t_lo);
  const double v_hi = F.cdf(std::min(t_hi, model.tau_J()));
  if (!(v_hi > v_lo)) return std::vector<double>(cells, 0.0);
  QuadratureConfig inner = cfg;
  inner.abs_tol = std::max(cfg.abs_tol, 1e-12);
  return integrate_vector(integrand, cells, v_lo, v_hi, inner, Mesh::Uniform).value;
}

double ncgt_given_nc_pmf(const CureModel& model, long n, double t, long l, long r) {
  require_n(n);
  if (l < 0 || l > n - 1 || r < 0 || r > l) {
    throw DomainError(fmt::format("ncgt_given_nc_pmf: need 0 <= r <= l <= n-1, got r={} l={}", r, l));
  }
  if (!(t > 0.0 && t < model.tau_H())) throw DomainError("ncgt_given_nc_pmf: t outside (0, tau_H)");
  const double q = model.pc_plus(t);
  const double lg = log_choose(l, r) + xlog(r, q) + xlog1m(l - r, q);
  return lg == kNegInf ? 0.0 : std::exp(lg);
}

double all_censored_obs_cdf(const CureModel& model, std::span<const double> t) {
  if (t.empty()) throw DomainError("all_censored_obs_cdf: empty argument vector");
  const double total = model.censored_total();
  if (!(total > 0.0)) throw DegenerateModelError("all_censored_obs_cdf: all-censored event has zero probability");
  double value = 1.0;
  for (double ti : t) value *= model.censored_mass(0.0, std::max(ti, 0.0)) / total;
  return value;
}

double quantile(const CureModel& model, long n, QuantileStatistic statistic, double prob,
                const QuadratureConfig& cfg) {
  require_n(n);
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError(fmt::format("quantile: prob={} outside (0, 1)", prob));
  Integrand cdf;
  double atom = 0.0;
  switch (statistic) {
    case QuantileStatistic::Diff:
      cdf = [&](double u) { return diff_cdf(model, n, u, cfg).value; };
      atom = diff_atom(model, n, cfg).value;
      break;
    case QuantileStatistic::Mu:
      cdf = [&](double t) { return mu_cdf(model, n, t).value; };
      atom = mu_cdf(model, n, 0.0).value;
      break;
    case QuantileStatistic::M:
      cdf = [&](double x) { return m_cdf(model, n, x).value; };
      break;
  }
  if (prob <= atom) return 0.0;
  double hi = finite_upper(model, cdf, prob);
  if (statistic == QuantileStatistic::Mu && std::isfinite(model.tau_J())) hi = model.tau_J();
  return invert_monotone(cdf, prob, 0.0, hi);
}

CdfValue evaluate(const CureModel& model, const ExactQuery& q, const QuadratureConfig& cfg) {
  require_n(q.n);
  switch (q.statistic) {
    case ExactStatistic::M:
      return m_cdf(model, q.n, q.x);
    case ExactStatistic::Mu:
      return mu_cdf(model, q.n, q.t);
    case ExactStatistic::JointMuM:
      return joint_mu_m(model, q.n, q.t, q.x);
    case ExactStatistic::JointMuNcGt:
      return joint_mu_ncgt(model, q.n, q.t, q.r, cfg);
    case ExactStatistic::Diff:
      return diff_cdf(model, q.n, q.u, cfg);
    case ExactStatistic::Ratio:
      return ratio_cdf(model, q.n, q.v, cfg);
    case ExactStatistic::CountsPmf:
      return {counts_pmf(model, q.n, q.t, q.r, q.s, q.k), 0.0};
    case ExactStatistic::NcGtGivenNc:
      return {ncgt_given_nc_pmf(model, q.n, q.t, q.l, q.r), 0.0};
    case ExactStatistic::AllCensoredObsCdf:
      if (static_cast<long>(q.t_vec.size()) != q.n) {
        throw DomainError("all-censored cdf needs exactly n arguments");
      }
      return {all_censored_obs_cdf(model, q.t_vec), 0.0};
  }
  throw DomainError("unknown statistic");
}

}  // namespace survmax::exact
