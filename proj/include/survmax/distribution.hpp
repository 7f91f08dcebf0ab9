#pragma once

#include <optional>
#include <string>
#include <variant>

namespace survmax {

struct Uniform {
  double lo;
  double hi;
};

struct Exponential {
  double rate;
};

/// Exponential(rate) conditioned on [0, tau].
struct TruncatedExponential {
  double rate;
  double tau;
};

/// cdf 1 - ((tau - x) / tau)^beta on [0, tau]; tail (z / tau)^beta at the endpoint.
struct EndpointPower {
  double tau;
  double beta;
};

/// Right-endpoint tail shape: sf(upper - z) ~ constant * z^exponent as z -> 0.
struct EndpointTail {
  double exponent;
  double constant;
};

/// A continuous distribution on [0, upper] (upper possibly infinite) from one
/// of four closed-form families. Immutable after construction.
class Distribution {
 public:
  using Family = std::variant<Uniform, Exponential, TruncatedExponential, EndpointPower>;

  /// Throws DomainError on invalid parameters.
  explicit Distribution(Family family);

  static Distribution uniform(double lo, double hi) { return Distribution(Uniform{lo, hi}); }
  static Distribution exponential(double rate) { return Distribution(Exponential{rate}); }
  static Distribution truncated_exponential(double rate, double tau) {
    return Distribution(TruncatedExponential{rate, tau});
  }
  static Distribution endpoint_power(double tau, double beta) {
    return Distribution(EndpointPower{tau, beta});
  }

  double cdf(double x) const;
  /// 1 - cdf(x), evaluated without cancellation.
  double sf(double x) const;
  double pdf(double x) const;
  /// Smallest x with cdf(x) >= prob; prob in [0, 1].
  double quantile(double prob) const;

  /// Left end of the support (where the cdf starts to increase).
  double lower() const;
  /// Right endpoint; +infinity for the exponential family.
  double upper() const;

  /// Integral of sf over [a, b]; b may be +infinity.
  double sf_integral(double a, double b) const;

  /// Tail shape at a finite right endpoint; nullopt when upper() is infinite.
  std::optional<EndpointTail> endpoint_tail() const;

  const Family& family() const noexcept { return family_; }
  std::string name() const;
  std::string describe() const;

 private:
  Family family_;
};

}  // namespace survmax
