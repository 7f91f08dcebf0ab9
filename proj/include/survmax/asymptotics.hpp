#pragma once

#include <string>

#include "survmax/cure_model.hpp"

namespace survmax::asymptotics {

enum class CaseTag { Case1, Case2, Case3, Unsupported };

/// Limit regime of a model together with the tail constants the limit laws
/// need. Fields a case does not use are left at zero.
///
/// Tails are written G-bar(tau_G - z) ~ a_G z^gamma and
/// F-bar(tau_F - z) ~ a_F z^beta as z -> 0.
struct LimitCase {
  CaseTag tag = CaseTag::Unsupported;
  double gamma = 0.0;
  double beta = 0.0;
  double a_G = 0.0;
  double a_F = 0.0;
  double p = 0.0;
  double G_bar_at_tauF = 0.0;  ///< Cases 1 and 2
  double F_at_tauG = 0.0;      ///< Case 3
  double f_at_tauG = 0.0;      ///< Case 3
  double tau_F = 0.0;
  double tau_G = 0.0;
  std::string reason;  ///< why a model is Unsupported
};

/// Case 1: tau_F < tau_G < inf, p < 1.
/// Case 2: tau_F < tau_G < inf, p = 1, and F-bar(tau_F - z) / G-bar(tau_G - z) -> 1.
/// Case 3: tau_G < tau_F (tau_F may be infinite) with f(tau_G) > 0.
LimitCase classify(const CureModel& model);

/// Norming constants. a_n scales tau - M(n); b_n scales tau - M_u(n).
struct Norming {
  double a_n = 0.0;
  double b_n = 0.0;
};

/// Case 1: n G-bar(tau_G - 1/a_n) = 1 and n F-bar(tau_F - 1/b_n) = 1.
/// Case 2: a_n as in Case 1, b_n = a_n.
/// Case 3: a_n as in Case 1 and b_n^{-1} G-bar(tau_G - 1/b_n) = 1/n.
/// Exact power tails are solved in closed form, others by bisection in log x.
/// Throws MisuseError for Unsupported, DomainError for n < 2 and BracketError
/// when a root cannot be bracketed.
Norming norming(const CureModel& model, const LimitCase& limit, long n);

enum class LimitWhich { M, Mu, Joint };

/// Limit cdf of a_n(tau - M(n)) at u (M), of b_n(tau - M_u(n)) at v (Mu),
/// or their joint limit at (u, v). In Case 3 the Mu law is also the limit of
/// b_n(M(n) - M_u(n)).
double limit_cdf(const LimitCase& limit, LimitWhich which, double u, double v);

/// Closed-form inverse of a marginal limit law; `which` must be M or Mu.
double limit_quantile(const LimitCase& limit, LimitWhich which, double prob);

std::string to_string(CaseTag tag);

}  // namespace survmax::asymptotics
