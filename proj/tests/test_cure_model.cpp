#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "survmax/cure_model.hpp"
#include "survmax/errors.hpp"
#include "survmax/quadrature.hpp"
#include "survmax/stats.hpp"

using namespace survmax;

namespace {

CureModel unit_uniform() { return CureModel(Distribution::uniform(0, 1), Distribution::uniform(0, 1), 1.0); }

std::vector<CureModel> models() {
  return {
      unit_uniform(),
      CureModel(Distribution::exponential(1.0), Distribution::uniform(0, 1), 0.7),
      CureModel(Distribution::truncated_exponential(1.0, 4.61), Distribution::uniform(0, 3), 0.7),
      CureModel(Distribution::endpoint_power(1.0, 2.0), Distribution::uniform(0, 2), 0.5),
      CureModel(Distribution::exponential(1.0), Distribution::endpoint_power(2.0, 1.5), 0.6),
      CureModel(Distribution::uniform(0, 1), Distribution::truncated_exponential(0.5, 3.0), 0.8),
      CureModel(Distribution::endpoint_power(3.0, 0.7), Distribution::exponential(0.5), 0.9),
      CureModel(Distribution::uniform(0, 1), Distribution::uniform(1, 2), 1.0),
  };
}

}  // namespace

TEST(CureModel, EndpointsFollowDefinitions) {
  const CureModel a(Distribution::uniform(0, 2), Distribution::uniform(0, 1), 0.7);
  EXPECT_EQ(a.tau_F(), 2.0);
  EXPECT_EQ(a.tau_G(), 1.0);
  EXPECT_TRUE(std::isinf(a.tau_Fstar()));
  EXPECT_EQ(a.tau_H(), 1.0);
  EXPECT_EQ(a.tau_J(), 1.0);
  const CureModel b(Distribution::uniform(0, 1), Distribution::uniform(0, 3), 1.0);
  EXPECT_EQ(b.tau_Fstar(), 1.0);
  EXPECT_EQ(b.tau_H(), 1.0);
  for (const auto& m : models()) EXPECT_LE(m.tau_J(), m.tau_H());
}

TEST(CureModel, RejectsBadFraction) {
  EXPECT_THROW(CureModel(Distribution::uniform(0, 1), Distribution::uniform(0, 1), 0.0), DomainError);
  EXPECT_THROW(CureModel(Distribution::uniform(0, 1), Distribution::uniform(0, 1), 1.2), DomainError);
}

TEST(CureModel, FstarExamples) {
  EXPECT_DOUBLE_EQ(unit_uniform().fstar_sf(0.5), 0.5);
  const CureModel m(Distribution::uniform(0, 1), Distribution::uniform(0, 2), 0.7);
  EXPECT_NEAR(m.fstar_sf(1.5), 0.3, 1e-15);
  const CureModel t(Distribution::truncated_exponential(1.0, 4.61), Distribution::uniform(0, 1), 0.7);
  EXPECT_NEAR(t.fstar_sf(1.0), 1.0 - 0.7 * (1.0 - std::exp(-1.0)) / (1.0 - std::exp(-4.61)), 1e-15);
}

TEST(CureModel, UnitUniformHAndJ) {
  const CureModel m = unit_uniform();
  EXPECT_NEAR(m.h_sf(0.5), 0.25, 1e-15);
  for (double x : {0.1, 0.3, 0.7}) EXPECT_NEAR(m.h_cdf(x), 2 * x - x * x, 1e-15);
  EXPECT_NEAR(m.j_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(m.j_cdf(0.5), 0.875, 1e-15);
  EXPECT_EQ(m.j_cdf(1.0), 1.0);
  EXPECT_EQ(m.j_cdf(2.0), 1.0);
}

TEST(CureModel, HSurvivorIsProductForm) {
  for (const auto& m : models()) {
    const Distribution& F = m.lifetime();
    const Distribution& G = m.censoring();
    for (double x : {0.0, 0.2, 0.9, 1.7}) {
      EXPECT_NEAR(m.h_sf(x), (1 - m.p() + m.p() * F.sf(x)) * G.sf(x), 1e-15);
    }
    EXPECT_EQ(m.h_sf(0.0), 1.0);
    if (std::isfinite(m.tau_H())) EXPECT_NEAR(m.h_cdf(m.tau_H()), 1.0, 1e-15);
  }
}

TEST(CureModel, MassDecompositionOfH) {
  std::mt19937_64 gen(3);
  for (const auto& m : models()) {
    const double top = std::isfinite(m.tau_H()) ? m.tau_H() : 20.0;
    std::uniform_real_distribution<double> u(0.0, top);
    for (int i = 0; i < 20; ++i) {
      double a = u(gen), b = u(gen);
      if (a > b) std::swap(a, b);
      EXPECT_NEAR(m.h_cdf(b) - m.h_cdf(a), m.censored_mass(a, b) + m.uncensored_mass(a, b), 1e-10) << m.describe();
    }
  }
}

TEST(CureModel, MassesMatchDirectQuadrature) {
  for (const auto& m : models()) {
    const Distribution& F = m.lifetime();
    const Distribution& G = m.censoring();
    const double top = std::isfinite(m.tau_H()) ? m.tau_H() : 15.0;
    for (double frac : {0.25, 0.6, 1.0}) {
      const double b = top * frac;
      QuadratureConfig cfg{1e-13, 1e-12, 4000, true};
      auto c = [&](double z) { return m.fstar_sf(z) * G.pdf(z); };
      // uncensored mass by parts, keeping the integrand bounded at a singular F density
      auto u = [&](double z) { return F.sf(z) * G.pdf(z); };
      std::vector<double> cuts{0.0};
      for (double k : {G.lower(), F.upper(), G.upper()}) {
        if (k > 0.0 && k < b) cuts.push_back(k);
      }
      cuts.push_back(b);
      std::sort(cuts.begin(), cuts.end());
      double cd = 0.0, ud = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        cd += integrate(c, cuts[i], cuts[i + 1], cfg, Mesh::Uniform).value;
        ud += integrate(u, cuts[i], cuts[i + 1], cfg, Mesh::Uniform).value;
      }
      EXPECT_NEAR(m.censored_mass(0.0, b), cd, 1e-8) << m.describe();
      ud = m.p() * (G.sf(0.0) * F.sf(0.0) - G.sf(b) * F.sf(b) - ud);
      EXPECT_NEAR(m.uncensored_mass(0.0, b), ud, 1e-8) << m.describe();
    }
  }
}

TEST(CureModel, PFunctionsExamplesAndSum) {
  const CureModel m = unit_uniform();
  const PFunctions pf = m.p_functions(0.5);
  EXPECT_NEAR(pf.censored_below, 0.375 / 0.875, 1e-14);
  EXPECT_NEAR(pf.uncensored_below, 0.375 / 0.875, 1e-14);
  EXPECT_NEAR(pf.censored_above, 0.125 / 0.875, 1e-14);
  EXPECT_THROW(m.p_functions(0.0), DomainError);
  EXPECT_THROW(m.p_functions(1.0), DomainError);

  std::mt19937_64 gen(5);
  const auto ms = models();
  for (int i = 0; i < 50; ++i) {
    const CureModel& model = ms[static_cast<std::size_t>(i) % ms.size()];
    const double top = std::isfinite(model.tau_H()) ? model.tau_H() : 10.0;
    const double t = std::uniform_real_distribution<double>(1e-3, top * 0.999)(gen);
    const PFunctions p = model.p_functions(t);
    EXPECT_NEAR(p.censored_above + p.censored_below + p.uncensored_below, 1.0, 1e-10);
    for (double v : {p.censored_above, p.censored_below, p.uncensored_below}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(CureModel, PcPlus) {
  const CureModel m = unit_uniform();
  EXPECT_EQ(m.pc_plus(0.0), 1.0);
  EXPECT_EQ(m.pc_plus(1.0), 0.0);
  EXPECT_NEAR(m.pc_plus(0.5), 0.25, 1e-15);
  double prev = 1.0;
  for (int i = 0; i <= 50; ++i) {
    const double v = m.pc_plus(i / 50.0);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  EXPECT_THROW(m.pc_plus(1.5), DomainError);
}

TEST(CureModel, SamplerUncensoredFraction) {
  const CureModel m = unit_uniform();
  Rng rng(2024);
  const long draws = 1000000;
  long uncensored = 0;
  for (long i = 0; i < draws; ++i) uncensored += m.sample_one(rng).uncensored ? 1 : 0;
  const double sigma = std::sqrt(0.25 / draws);
  EXPECT_NEAR(static_cast<double>(uncensored) / draws, 0.5, 3 * sigma);
}

TEST(CureModel, SamplerExtremes) {
  const CureModel early(Distribution::uniform(0, 1e-6), Distribution::uniform(9, 10), 1.0);
  const CureModel immune(Distribution::uniform(0, 1), Distribution::uniform(0, 1), 1e-12);
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_TRUE(early.sample_one(rng).uncensored);
    const Observation o = immune.sample_one(rng);
    EXPECT_FALSE(o.uncensored);
    EXPECT_TRUE(std::isfinite(o.time));
  }
}

TEST(CureModel, SampledTimesFollowH) {
  for (const auto& m : models()) {
    Rng rng(99);
    std::vector<double> times(100000);
    for (auto& t : times) t = m.sample_one(rng).time;
    const stats::TestResult ks = stats::ks_one_sample(times, [&](double x) { return m.h_cdf(x); });
    // 99% KS bound
    EXPECT_LT(ks.statistic, 1.628 / std::sqrt(100000.0)) << m.describe();
  }
}

TEST(CureModel, SamplerAlwaysConsumesThreeUniforms) {
  const CureModel a(Distribution::uniform(0, 1), Distribution::uniform(0, 1), 0.5);
  Rng r1(5), r2(5);
  a.sample_one(r1);
  for (int i = 0; i < 3; ++i) r2.uniform();
  EXPECT_EQ(r1.uniform(), r2.uniform());
}
