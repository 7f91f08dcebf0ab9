#include "survmax/cure_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>

#include <fmt/format.h>

#include "survmax/errors.hpp"
#include "survmax/quadrature.hpp"

namespace survmax {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// Running integrals for non-uniform censoring, both in probability
// coordinates so that the ranges are finite even when tau_H is infinite:
//   censored:   w = G(z),  int F*-bar(G^{-1}(w)) dw
//   uncensored: v = F(z),  int G-bar(F^{-1}(v)) dv   (times p)
struct CureModel::Tables {
  CumulativeIntegral censored;
  CumulativeIntegral uncensored;
};

CureModel::CureModel(Distribution lifetime, Distribution censoring, double susceptible_fraction)
    : F_(std::move(lifetime)), G_(std::move(censoring)), p_(susceptible_fraction) {
  if (!(p_ > 0.0 && p_ <= 1.0)) throw DomainError(fmt::format("susceptible fraction p={} outside (0, 1]", p_));
  tau_F_ = F_.upper();
  tau_G_ = G_.upper();
  tau_Fstar_ = p_ < 1.0 ? kInf : tau_F_;
  tau_H_ = std::min(tau_Fstar_, tau_G_);
  tau_J_ = std::min(tau_F_, tau_G_);

  if (!std::holds_alternative<Uniform>(G_.family())) {
    const Distribution F = F_;
    const Distribution G = G_;
    const double p = p_;
    const double w_max = std::isinf(tau_H_) ? 1.0 : G.cdf(tau_H_);
    std::vector<double> w_kinks{G.cdf(F.lower())};
    if (std::isfinite(F.upper())) w_kinks.push_back(G.cdf(F.upper()));
    auto censored_integrand = [F, G, p](double w) { return 1.0 - p * F.cdf(G.quantile(w)); };

    const double v_max = std::isinf(tau_J_) ? 1.0 : F.cdf(tau_J_);
    std::vector<double> v_kinks{F.cdf(G.lower())};
    if (std::isfinite(G.upper())) v_kinks.push_back(F.cdf(G.upper()));
    auto uncensored_integrand = [F, G](double v) { return G.sf(F.quantile(v)); };

    auto tables = std::make_shared<Tables>();
    if (w_max > 0.0) tables->censored = CumulativeIntegral(censored_integrand, 0.0, w_max, w_kinks);
    if (v_max > 0.0) tables->uncensored = CumulativeIntegral(uncensored_integrand, 0.0, v_max, v_kinks);
    tables_ = std::move(tables);
  }
  censored_total_ = censored_mass(0.0, tau_H_);
  uncensored_total_ = uncensored_mass(0.0, tau_H_);
}

double CureModel::fstar_sf(double x) const { return 1.0 - p_ * F_.cdf(x); }

double CureModel::h_sf(double x) const {
  if (x <= 0.0) return 1.0;
  return (1.0 - p_ + p_ * F_.sf(x)) * G_.sf(x);
}

double CureModel::censored_mass(double a, double b) const {
  a = std::clamp(a, 0.0, tau_H_);
  b = std::clamp(b, 0.0, tau_H_);
  if (!(b > a)) return 0.0;
  if (const auto* u = std::get_if<Uniform>(&G_.family())) {
    const double c = std::max(a, u->lo);
    const double d = std::min(b, u->hi);
    if (!(d > c)) return 0.0;
    return ((1.0 - p_) * (d - c) + p_ * F_.sf_integral(c, d)) / (u->hi - u->lo);
  }
  if (tables_->censored.total() == 0.0) return 0.0;
  return std::max(0.0, tables_->censored.between(G_.cdf(a), std::isinf(b) ? 1.0 : G_.cdf(b)));
}

double CureModel::uncensored_mass(double a, double b) const {
  a = std::clamp(a, 0.0, tau_H_);
  b = std::clamp(b, 0.0, tau_J_);
  if (!(b > a)) return 0.0;
  if (const auto* u = std::get_if<Uniform>(&G_.family())) {
    double total = 0.0;
    if (a < u->lo) total += F_.sf(a) - F_.sf(std::min(b, u->lo));
    const double c = std::max(a, u->lo);
    const double d = std::min(b, u->hi);
    if (d > c) {
      // int_c^d (hi - z) dF(z), integrated by parts against F-bar
      const double by_parts = (u->hi - c) * F_.sf(c) - (u->hi - d) * F_.sf(d) - F_.sf_integral(c, d);
      total += std::max(0.0, by_parts) / (u->hi - u->lo);
    }
    return p_ * std::max(0.0, total);
  }
  if (tables_->uncensored.total() == 0.0) return 0.0;
  return p_ * std::max(0.0, tables_->uncensored.between(F_.cdf(a), std::isinf(b) ? 1.0 : F_.cdf(b)));
}

double CureModel::j_sf(double t) const {
  if (t <= 0.0) return uncensored_total_;
  if (t >= tau_J_) return 0.0;
  return uncensored_mass(t, tau_H_);
}

double CureModel::j_cdf(double t) const { return 1.0 - j_sf(t); }

PFunctions CureModel::p_functions(double t) const {
  if (!(t > 0.0 && t < tau_H_)) {
    throw DomainError(fmt::format("p_functions: t={} outside (0, tau_H={})", t, tau_H_));
  }
  const double above = censored_mass(t, tau_H_);
  const double denom = above + h_cdf(t);
  if (!(denom > 0.0)) throw DegenerateModelError("p_functions: J(t) vanishes");
  return {above / denom, censored_mass(0.0, t) / denom, uncensored_mass(0.0, t) / denom};
}

double CureModel::pc_plus(double t) const {
  if (!(t >= 0.0 && t <= tau_H_)) throw DomainError(fmt::format("pc_plus: t={} outside [0, tau_H]", t));
  if (!(censored_total_ > 0.0)) throw DegenerateModelError("pc_plus: censoring has zero probability");
  if (t <= 0.0) return 1.0;
  return censored_mass(t, tau_H_) / censored_total_;
}

Observation CureModel::sample_one(Rng& rng) const {
  // Always consume three uniforms so streams stay aligned across models.
  const double b = rng.uniform();
  const double l = rng.uniform();
  const double c = rng.uniform();
  const std::optional<double> lifetime = b < p_ ? std::optional<double>(F_.quantile(l)) : std::nullopt;
  const double censor = G_.quantile(c);
  if (lifetime && *lifetime <= censor) return {*lifetime, true};
  return {censor, false};
}

std::string CureModel::describe() const {
  return fmt::format("F={} G={} p={}", F_.describe(), G_.describe(), p_);
}

}  // namespace survmax
