#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace survmax {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  /// Grade the starting mesh geometrically toward the right endpoint so that
  /// mass concentrated in a window of width ~ n^{-1/(1+gamma)} next to it is
  /// resolved for any n.
  bool endpoint_transform = true;

  /// Throws DomainError unless tolerances are positive and max_subdivisions >= 10.
  void validate() const;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// How the adaptive integrator seeds its panel list.
enum class Mesh {
  Single,       ///< one panel [a, b]
  Uniform,      ///< 16 equal panels
  RightGraded,  ///< 16 equal panels, the last one split geometrically toward b
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (10/21) integration over [a, b].
/// Throws QuadratureError (carrying the best estimate) when the subdivision
/// budget is exhausted before max(abs_tol, rel_tol*|value|) is met.
QuadResult integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg = {},
                     Mesh mesh = Mesh::Single);

/// Mesh used for integrands carrying a (.)^{n-1} factor: RightGraded when the
/// config enables the endpoint transform and n is large, Uniform otherwise.
Mesh peaked_mesh(const QuadratureConfig& cfg, long n, long threshold = 1000);

struct VectorQuadResult {
  std::vector<double> value;
  double error = 0.0;  ///< sum over panels of the max-norm error estimate
};

/// Writes f(x) into `out` (size `dim`).
using VectorIntegrand = std::function<void(double x, std::span<double> out)>;

/// Adaptive Gauss-Kronrod for vector-valued integrands; the error of a panel
/// is the max-norm of its componentwise Kronrod-Gauss differences.
VectorQuadResult integrate_vector(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                  const QuadratureConfig& cfg = {}, Mesh mesh = Mesh::Uniform);

/// base^exponent evaluated as exp(exponent * log(base)); exact at base 0 and 1.
/// Throws DomainError when base lies outside [0, 1 + 1e-12].
double log_pow_integrand_guard(double base, long exponent);

/// (1 - deficit)^exponent via log1p, for bases written as 1 minus a small
/// nonnegative deficit. Exact at deficit 0 and 1.
double pow_one_minus(double deficit, long exponent);

/// Bisection with a final secant step for a nondecreasing F on [lo, hi].
/// Returns x with |F(x) - target| <= 1e-7 (or a bracket of machine width at a
/// jump) and bracket width <= 1e-6 * (hi - lo). Throws BracketError when
/// target lies outside [F(lo), F(hi)].
double invert_monotone(const Integrand& F, double target, double lo, double hi);

/// Running integral of a fixed integrand, tabulated once at panel nodes and
/// completed inside a panel with a single Kronrod rule. Kinks of the
/// integrand must be passed as breakpoints so every panel is smooth.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;
  CumulativeIntegral(Integrand f, double lo, double hi, std::vector<double> breakpoints,
                     const QuadratureConfig& cfg = {1e-15, 1e-13, 4000, true});

  /// Integral from lo to x (x clamped into [lo, hi]).
  double operator()(double x) const;
  /// Integral over [a, b], a <= b.
  double between(double a, double b) const;
  double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double lo() const { return nodes_.front(); }
  double hi() const { return nodes_.back(); }

 private:
  Integrand f_;
  std::vector<double> nodes_;
  std::vector<double> cumulative_;
};

}  // namespace survmax
