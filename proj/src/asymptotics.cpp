#include "survmax/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <variant>

#include <fmt/format.h>

#include "survmax/errors.hpp"
#include "survmax/quadrature.hpp"

namespace survmax::asymptotics {

namespace {

bool exact_power_tail(const Distribution& d) {
  return std::holds_alternative<Uniform>(d.family()) || std::holds_alternative<EndpointPower>(d.family());
}

// Solves x^{-k} sf(tau - 1/x) = 1/n for x, where sf(tau - z) ~ c z^e.
double solve_norming(const Distribution& d, double k, long n) {
  const EndpointTail tail = *d.endpoint_tail();
  const double tau = d.upper();
  const double range = tau - d.lower();
  const double nd = static_cast<double>(n);
  const double closed = std::pow(nd * tail.constant, 1.0 / (tail.exponent + k));
  if (exact_power_tail(d) && 1.0 / closed <= range) return closed;

  // -log(x^{-k} sf(tau - 1/x)) is nondecreasing in y = log x.
  auto neg_log_h = [&](double y) {
    const double x = std::exp(y);
    const double s = d.sf(tau - 1.0 / x);
    return s > 0.0 ? k * y - std::log(s) : 1e300;
  };
  const double target = std::log(nd);
  const double y_lo = -std::log(range);
  if (neg_log_h(y_lo) > target) {
    throw BracketError(fmt::format("norming: n={} too small to bracket the root for {}", n, d.describe()));
  }
  double y_hi = std::max(y_lo, std::log(closed)) + 1.0;
  for (int i = 0; i < 200 && neg_log_h(y_hi) < target; ++i) y_hi += 1.0;
  if (neg_log_h(y_hi) < target) throw BracketError("norming: root not bracketed");
  return std::exp(invert_monotone(neg_log_h, target, y_lo, y_hi));
}

double weibull_cdf(double x, double rate, double shape) {
  if (!(x > 0.0)) return 0.0;
  return -std::expm1(-rate * std::pow(x, shape));
}

double weibull_quantile(double prob, double rate, double shape) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError(fmt::format("limit_quantile: prob={} outside (0, 1)", prob));
  return std::pow(-std::log1p(-prob) / rate, 1.0 / shape);
}

void require_supported(const LimitCase& limit) {
  if (limit.tag == CaseTag::Unsupported) {
    throw MisuseError("no limit law for an unsupported model" + (limit.reason.empty() ? "" : ": " + limit.reason));
  }
}

// (rate, shape) of the Weibull-type marginal limit for M or Mu.
std::pair<double, double> marginal(const LimitCase& c, LimitWhich which) {
  switch (c.tag) {
    case CaseTag::Case1:
      if (which == LimitWhich::M) return {1.0 - c.p, c.gamma};
      return {c.p * c.G_bar_at_tauF, c.beta};
    case CaseTag::Case2:
      return {c.G_bar_at_tauF, c.beta};
    case CaseTag::Case3:
      if (which == LimitWhich::M) return {1.0 - c.p * c.F_at_tauG, c.gamma};
      return {c.p * c.f_at_tauG / (1.0 + c.gamma), 1.0 + c.gamma};
    case CaseTag::Unsupported:
      break;
  }
  throw MisuseError("no limit law for an unsupported model");
}

}  // namespace

std::string to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::Case1:
      return "Case1";
    case CaseTag::Case2:
      return "Case2";
    case CaseTag::Case3:
      return "Case3";
    case CaseTag::Unsupported:
      break;
  }
  return "Unsupported";
}

LimitCase classify(const CureModel& model) {
  const Distribution& F = model.lifetime();
  const Distribution& G = model.censoring();
  LimitCase c;
  c.p = model.p();
  c.tau_F = model.tau_F();
  c.tau_G = model.tau_G();

  if (!std::isfinite(c.tau_G)) {
    c.reason = "censoring distribution has an infinite right endpoint";
    return c;
  }
  if (c.tau_F == c.tau_G) {
    c.reason = "tau_F equals tau_G";
    return c;
  }
  const EndpointTail g_tail = *G.endpoint_tail();

  if (c.tau_F < c.tau_G) {
    const EndpointTail f_tail = *F.endpoint_tail();
    c.beta = f_tail.exponent;
    c.a_F = f_tail.constant;
    c.G_bar_at_tauF = G.sf(c.tau_F);
    if (c.p < 1.0) {
      c.tag = CaseTag::Case1;
      c.gamma = g_tail.exponent;
      c.a_G = g_tail.constant;
      return c;
    }
    for (double z : std::array{1e-2, 1e-3, 1e-4}) {
      const double g = G.sf(c.tau_G - z);
      const double ratio = g > 0.0 ? F.sf(c.tau_F - z) / g : 0.0;
      if (!(std::abs(ratio - 1.0) <= 0.01)) {
        c.reason = fmt::format("p = 1 but the endpoint tails are not balanced (ratio {} at z={})", ratio, z);
        c.beta = c.a_F = c.G_bar_at_tauF = 0.0;
        return c;
      }
    }
    c.tag = CaseTag::Case2;
    c.gamma = g_tail.exponent;
    c.a_G = g_tail.constant;
    return c;
  }

  const double f = F.pdf(c.tau_G);
  if (!(f > 0.0)) {
    c.reason = "lifetime density vanishes at tau_G";
    return c;
  }
  c.tag = CaseTag::Case3;
  c.gamma = g_tail.exponent;
  c.a_G = g_tail.constant;
  c.F_at_tauG = F.cdf(c.tau_G);
  c.f_at_tauG = f;
  return c;
}

Norming norming(const CureModel& model, const LimitCase& limit, long n) {
  require_supported(limit);
  if (n < 2) throw DomainError(fmt::format("norming: n={} must be >= 2", n));
  Norming out;
  out.a_n = solve_norming(model.censoring(), 0.0, n);
  switch (limit.tag) {
    case CaseTag::Case1:
      out.b_n = solve_norming(model.lifetime(), 0.0, n);
      break;
    case CaseTag::Case2:
      out.b_n = out.a_n;
      break;
    case CaseTag::Case3:
      out.b_n = solve_norming(model.censoring(), 1.0, n);
      break;
    case CaseTag::Unsupported:
      break;
  }
  return out;
}

double limit_cdf(const LimitCase& limit, LimitWhich which, double u, double v) {
  require_supported(limit);
  if (which == LimitWhich::M) {
    const auto [rate, shape] = marginal(limit, LimitWhich::M);
    return weibull_cdf(u, rate, shape);
  }
  if (which == LimitWhich::Mu) {
    const auto [rate, shape] = marginal(limit, LimitWhich::Mu);
    return weibull_cdf(v, rate, shape);
  }
  if (limit.tag == CaseTag::Case2) {
    // Both normalized maxima share one limit variable.
    const auto [rate, shape] = marginal(limit, LimitWhich::M);
    return weibull_cdf(std::min(u, v), rate, shape);
  }
  const auto [rate_m, shape_m] = marginal(limit, LimitWhich::M);
  const auto [rate_u, shape_u] = marginal(limit, LimitWhich::Mu);
  return weibull_cdf(u, rate_m, shape_m) * weibull_cdf(v, rate_u, shape_u);
}

double limit_quantile(const LimitCase& limit, LimitWhich which, double prob) {
  require_supported(limit);
  if (which == LimitWhich::Joint) throw MisuseError("limit_quantile: the joint law has no scalar quantile");
  const auto [rate, shape] = marginal(limit, which);
  return weibull_quantile(prob, rate, shape);
}

}  // namespace survmax::asymptotics
