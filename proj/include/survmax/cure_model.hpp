#pragma once

#include <memory>
#include <string>

#include "survmax/distribution.hpp"
#include "survmax/rng.hpp"

namespace survmax {

/// One observed lifetime T = min(T*, U) with C = 1{T* <= U}.
struct Observation {
  double time;
  bool uncensored;
};

/// Conditional cell probabilities of a non-maximal observation given the
/// largest uncensored time equals t: censored above t, censored below t,
/// uncensored below t.
struct PFunctions {
  double censored_above;
  double censored_below;
  double uncensored_below;
};

/// Mixture cure censoring model (F, G, p): a susceptible fraction p has
/// lifetime law F, the rest never fail, and every lifetime is censored by an
/// independent draw from G.
///
/// Notation used throughout the library:
///   F*-bar(x) = 1 - p F(x)                 (improper lifetime survivor)
///   H-bar(x)  = F*-bar(x) G-bar(x)          (observed-time survivor)
///   C(a, b)   = int_a^b F*-bar dG           (censored mass on [a, b])
///   U(a, b)   = int_a^b G-bar dF*           (uncensored mass on [a, b])
///   J(t)      = 1 - U(t, tau_H)             (law of an uncensored time, atom at 0)
/// so that H(b) - H(a) = C(a, b) + U(a, b).
///
/// Immutable and cheap to copy; safe to share across threads.
class CureModel {
 public:
  /// Throws DomainError unless 0 < p <= 1.
  CureModel(Distribution lifetime, Distribution censoring, double susceptible_fraction);

  const Distribution& lifetime() const noexcept { return F_; }
  const Distribution& censoring() const noexcept { return G_; }
  double p() const noexcept { return p_; }

  double tau_F() const noexcept { return tau_F_; }
  double tau_G() const noexcept { return tau_G_; }
  double tau_Fstar() const noexcept { return tau_Fstar_; }
  double tau_H() const noexcept { return tau_H_; }
  double tau_J() const noexcept { return tau_J_; }

  double fstar_sf(double x) const;
  double fstar_cdf(double x) const { return 1.0 - fstar_sf(x); }
  double h_sf(double x) const;
  double h_cdf(double x) const { return 1.0 - h_sf(x); }

  /// C(a, b); arguments are clamped to [0, tau_H].
  double censored_mass(double a, double b) const;
  /// U(a, b); arguments are clamped to [0, tau_H].
  double uncensored_mass(double a, double b) const;
  /// C(0, tau_H): probability that a single observation is censored.
  double censored_total() const { return censored_total_; }

  /// J(t) = C(t, tau_H) + H(t); equals 1 for t >= tau_J.
  double j_cdf(double t) const;
  /// 1 - J(t) = U(t, tau_H).
  double j_sf(double t) const;

  /// Requires 0 < t < tau_H; throws DomainError otherwise.
  PFunctions p_functions(double t) const;
  /// C(t, tau_H) / C(0, tau_H) for 0 <= t <= tau_H.
  double pc_plus(double t) const;

  /// Draws (min(T*, U), 1{T* <= U}) with T* = +inf for immunes.
  Observation sample_one(Rng& rng) const;

  /// True when C and U are evaluated in closed form (uniform censoring).
  bool closed_form_masses() const noexcept { return tables_ == nullptr; }

  std::string describe() const;

 private:
  struct Tables;

  Distribution F_;
  Distribution G_;
  double p_;
  double tau_F_, tau_G_, tau_Fstar_, tau_H_, tau_J_;
  double censored_total_ = 0.0;
  double uncensored_total_ = 0.0;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace survmax
