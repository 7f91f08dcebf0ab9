#pragma once

#include <span>
#include <vector>

#include "survmax/cure_model.hpp"
#include "survmax/quadrature.hpp"

namespace survmax::exact {

/// A probability together with the quadrature error estimate behind it
/// (zero for closed-form values).
struct CdfValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// P(0 <= M_u(n) <= t, N_c^>(M_u(n)) = r) for 0 <= t <= tau_H, 0 <= r <= n-1.
CdfValue joint_mu_ncgt(const CureModel& model, long n, double t, long r, const QuadratureConfig& cfg = {});

/// P(M_u(n) <= t, M(n) <= x). Closed form in C, H and J.
CdfValue joint_mu_m(const CureModel& model, long n, double t, double x);

/// P(M_u(n) <= t) = J(t)^n; has an atom C(0, tau_H)^n at zero.
CdfValue mu_cdf(const CureModel& model, long n, double t);

/// P(M(n) <= x) = H(x)^n.
CdfValue m_cdf(const CureModel& model, long n, double x);

/// P(M(n) - M_u(n) <= u).
CdfValue diff_cdf(const CureModel& model, long n, double u, const QuadratureConfig& cfg = {});

/// P(M(n) = M_u(n)), the atom of the difference at zero.
CdfValue diff_atom(const CureModel& model, long n, const QuadratureConfig& cfg = {});

/// P(M(n) <= v M_u(n) | M_u(n) > 0). Throws DegenerateModelError when an
/// uncensored observation is numerically impossible.
CdfValue ratio_cdf(const CureModel& model, long n, double v, const QuadratureConfig& cfg = {});

/// n * int_0^{tau_H} J(t)^{n-1} dJ(t), evaluated by quadrature. Equals
/// 1 - C(0, tau_H)^n; used as a check on the quadrature path.
CdfValue uncensored_total_mass(const CureModel& model, long n, const QuadratureConfig& cfg = {});

/// Probability that all n observations are censored, C(0, tau_H)^n.
double all_censored_prob(const CureModel& model, long n);

/// Multinomial probability of (N_c^>, N_c^<, N_u^<) = (r, s, k) given M_u(n) = t.
double counts_pmf(const CureModel& model, long n, double t, long r, long s, long k);

/// P(M_u(n) in [t_lo, t_hi], counts = (r, s, k)) for every cell with
/// r + s + k = n - 1, ordered by cell_index(). Integrates the density of
/// M_u(n) against the conditional multinomial.
std::vector<double> counts_joint_cells(const CureModel& model, long n, double t_lo, double t_hi,
                                       const QuadratureConfig& cfg = {});

/// Position of (r, s) in the vector returned by counts_joint_cells.
std::size_t cell_index(long n, long r, long s);

/// Binomial(l, pc_plus(t)) pmf at r: the law of N_c^> given N_c = l and M_u(n) = t.
double ncgt_given_nc_pmf(const CureModel& model, long n, double t, long l, long r);

/// Conditional joint cdf of the n observed times given all are censored.
double all_censored_obs_cdf(const CureModel& model, std::span<const double> t);

enum class QuantileStatistic { Diff, Mu, M };

/// Inverse of the selected cdf at prob in (0, 1). Returns 0 whenever prob does
/// not exceed the atom at zero (Diff and Mu).
double quantile(const CureModel& model, long n, QuantileStatistic statistic, double prob,
                const QuadratureConfig& cfg = {});

enum class ExactStatistic { M, Mu, JointMuM, JointMuNcGt, Diff, Ratio, CountsPmf, NcGtGivenNc, AllCensoredObsCdf };

/// A tagged request for one of the formulas above.
struct ExactQuery {
  ExactStatistic statistic = ExactStatistic::M;
  long n = 1;
  double t = 0.0;
  double x = 0.0;
  double u = 0.0;
  double v = 0.0;
  long r = 0;
  long s = 0;
  long k = 0;
  long l = 0;
  std::vector<double> t_vec;
};

/// Validates the query's arguments and dispatches to the matching formula.
CdfValue evaluate(const CureModel& model, const ExactQuery& query, const QuadratureConfig& cfg = {});

/// p * int over [t_lo, t_hi] of phi(t) G-bar(t) dF(t), i.e. phi integrated
/// against the uncensored-time measure dJ, in F-probability coordinates.
QuadResult integrate_uncensored(const CureModel& model, const Integrand& phi, double t_lo, double t_hi,
                                const QuadratureConfig& cfg, Mesh mesh);

/// log of the binomial coefficient.
double log_choose(long n, long k);

}  // namespace survmax::exact
