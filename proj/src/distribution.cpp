#include "survmax/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "survmax/errors.hpp"

namespace survmax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

// 1 - e^{-rate * tau}
double trunc_mass(const TruncatedExponential& d) { return -std::expm1(-d.rate * d.tau); }

}  // namespace

Distribution::Distribution(Family family) : family_(family) {
  std::visit(Overloaded{
                 [](const Uniform& d) {
                   require(std::isfinite(d.lo) && std::isfinite(d.hi) && d.lo >= 0.0 && d.lo < d.hi,
                           "uniform requires 0 <= lo < hi");
                 },
                 [](const Exponential& d) {
                   require(std::isfinite(d.rate) && d.rate > 0.0, "exponential requires rate > 0");
                 },
                 [](const TruncatedExponential& d) {
                   require(std::isfinite(d.rate) && d.rate > 0.0 && std::isfinite(d.tau) && d.tau > 0.0,
                           "truncated exponential requires rate > 0 and tau > 0");
                 },
                 [](const EndpointPower& d) {
                   require(std::isfinite(d.tau) && d.tau > 0.0 && std::isfinite(d.beta) && d.beta > 0.0,
                           "endpoint power requires tau > 0 and beta > 0");
                 },
             },
             family_);
}

double Distribution::cdf(double x) const { return 1.0 - sf(x); }

double Distribution::sf(double x) const {
  return std::visit(Overloaded{
                        [x](const Uniform& d) {
                          if (x <= d.lo) return 1.0;
                          if (x >= d.hi) return 0.0;
                          return (d.hi - x) / (d.hi - d.lo);
                        },
                        [x](const Exponential& d) { return x <= 0.0 ? 1.0 : std::exp(-d.rate * x); },
                        [x](const TruncatedExponential& d) {
                          if (x <= 0.0) return 1.0;
                          if (x >= d.tau) return 0.0;
                          return std::exp(-d.rate * x) * -std::expm1(-d.rate * (d.tau - x)) / trunc_mass(d);
                        },
                        [x](const EndpointPower& d) {
                          if (x <= 0.0) return 1.0;
                          if (x >= d.tau) return 0.0;
                          return std::pow((d.tau - x) / d.tau, d.beta);
                        },
                    },
                    family_);
}

double Distribution::pdf(double x) const {
  return std::visit(Overloaded{
                        [x](const Uniform& d) { return (x < d.lo || x > d.hi) ? 0.0 : 1.0 / (d.hi - d.lo); },
                        [x](const Exponential& d) { return x < 0.0 ? 0.0 : d.rate * std::exp(-d.rate * x); },
                        [x](const TruncatedExponential& d) {
                          if (x < 0.0 || x > d.tau) return 0.0;
                          return d.rate * std::exp(-d.rate * x) / trunc_mass(d);
                        },
                        [x](const EndpointPower& d) {
                          if (x < 0.0 || x > d.tau) return 0.0;
                          return d.beta / d.tau * std::pow((d.tau - x) / d.tau, d.beta - 1.0);
                        },
                    },
                    family_);
}

double Distribution::quantile(double prob) const {
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError(fmt::format("quantile: prob {} outside [0,1]", prob));
  return std::visit(Overloaded{
                        [prob](const Uniform& d) { return d.lo + prob * (d.hi - d.lo); },
                        [prob](const Exponential& d) { return -std::log1p(-prob) / d.rate; },
                        [prob](const TruncatedExponential& d) {
                          if (prob >= 1.0) return d.tau;
                          return std::min(d.tau, -std::log1p(prob * std::expm1(-d.rate * d.tau)) / d.rate);
                        },
                        [prob](const EndpointPower& d) {
                          // tau * (1 - (1-prob)^{1/beta}), written to stay accurate for small prob
                          return -d.tau * std::expm1(std::log1p(-prob) / d.beta);
                        },
                    },
                    family_);
}

double Distribution::lower() const {
  if (const auto* u = std::get_if<Uniform>(&family_)) return u->lo;
  return 0.0;
}

double Distribution::upper() const {
  return std::visit(Overloaded{
                        [](const Uniform& d) { return d.hi; },
                        [](const Exponential&) { return kInf; },
                        [](const TruncatedExponential& d) { return d.tau; },
                        [](const EndpointPower& d) { return d.tau; },
                    },
                    family_);
}

double Distribution::sf_integral(double a, double b) const {
  a = std::max(a, 0.0);
  if (!(b > a)) return 0.0;
  return std::visit(Overloaded{
                        [a, b](const Uniform& d) {
                          double total = std::max(0.0, std::min(b, d.lo) - a);
                          const double c = std::max(a, d.lo);
                          const double e = std::min(b, d.hi);
                          if (e > c) total += (e - c) * ((d.hi - c) + (d.hi - e)) / (2.0 * (d.hi - d.lo));
                          return total;
                        },
                        [a, b](const Exponential& d) {
                          const double head = std::exp(-d.rate * a) / d.rate;
                          if (std::isinf(b)) return head;
                          return head * -std::expm1(-d.rate * (b - a));
                        },
                        [a, b](const TruncatedExponential& d) {
                          const double hi = std::min(b, d.tau);
                          if (!(hi > a)) return 0.0;
                          const double decay = std::exp(-d.rate * a) * -std::expm1(-d.rate * (hi - a)) / d.rate;
                          return (decay - std::exp(-d.rate * d.tau) * (hi - a)) / trunc_mass(d);
                        },
                        [a, b](const EndpointPower& d) {
                          const double hi = std::min(b, d.tau);
                          if (!(hi > a)) return 0.0;
                          const double k = d.beta + 1.0;
                          return d.tau / k *
                                 (std::pow((d.tau - a) / d.tau, k) - std::pow((d.tau - hi) / d.tau, k));
                        },
                    },
                    family_);
}

std::optional<EndpointTail> Distribution::endpoint_tail() const {
  return std::visit(Overloaded{
                        [](const Uniform& d) -> std::optional<EndpointTail> {
                          return EndpointTail{1.0, 1.0 / (d.hi - d.lo)};
                        },
                        [](const Exponential&) -> std::optional<EndpointTail> { return std::nullopt; },
                        [](const TruncatedExponential& d) -> std::optional<EndpointTail> {
                          // sf(tau - z) = e^{-rate tau} (e^{rate z} - 1) / mass ~ pdf(tau) z
                          return EndpointTail{1.0, d.rate * std::exp(-d.rate * d.tau) / trunc_mass(d)};
                        },
                        [](const EndpointPower& d) -> std::optional<EndpointTail> {
                          return EndpointTail{d.beta, std::pow(d.tau, -d.beta)};
                        },
                    },
                    family_);
}

std::string Distribution::name() const {
  return std::visit(Overloaded{
                        [](const Uniform&) { return std::string("uniform"); },
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const TruncatedExponential&) { return std::string("truncated_exponential"); },
                        [](const EndpointPower&) { return std::string("endpoint_power"); },
                    },
                    family_);
}

std::string Distribution::describe() const {
  return std::visit(Overloaded{
                        [](const Uniform& d) { return fmt::format("uniform({}, {})", d.lo, d.hi); },
                        [](const Exponential& d) { return fmt::format("exponential({})", d.rate); },
                        [](const TruncatedExponential& d) {
                          return fmt::format("truncated_exponential({}, {})", d.rate, d.tau);
                        },
                        [](const EndpointPower& d) { return fmt::format("endpoint_power({}, {})", d.tau, d.beta); },
                    },
                    family_);
}

}  // namespace survmax
