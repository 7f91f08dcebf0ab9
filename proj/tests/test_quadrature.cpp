#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "survmax/errors.hpp"
#include "survmax/quadrature.hpp"

using namespace survmax;

TEST(Quadrature, LinearExample) {
  EXPECT_NEAR(integrate([](double z) { return 1.0 - z; }, 0.0, 1.0).value, 0.5, 1e-15);
}

TEST(Quadrature, ExactOnPolynomialsUpToRuleDegree) {
  for (int deg = 0; deg <= 20; ++deg) {
    const QuadResult r = integrate([deg](double x) { return (deg + 1) * std::pow(x, deg); }, 0.0, 1.0);
    EXPECT_NEAR(r.value, 1.0, 1e-12) << "degree " << deg;
  }
}

TEST(Quadrature, DiagonalAtomOfUnitUniformModel) {
  // n (2t - t^2)^{n-1} (1 - t) at n = 2
  const QuadResult r = integrate([](double t) { return 2.0 * (2.0 * t - t * t) * (1.0 - t); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 0.5, 1e-14);
}

TEST(Quadrature, AdditiveOverRandomSplits) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  auto f = [](double x) { return std::exp(-x) * std::sin(5.0 * x) + std::sqrt(x); };
  for (int i = 0; i < 50; ++i) {
    double a = u(gen), b = u(gen), c = u(gen);
    if (a > b) std::swap(a, b);
    b = std::clamp(b, a, 3.0);
    c = a + (b - a) * 0.37;
    const double whole = integrate(f, a, b).value;
    const double parts = integrate(f, a, c).value + integrate(f, c, b).value;
    EXPECT_NEAR(whole, parts, 2e-10 + 2e-8 * std::abs(whole));
  }
}

TEST(Quadrature, PeakedPowerIntegrandNormalizes) {
  // n K^{n-1} k over [0, tau] equals 1 - K(0)^n.
  const double tau = 2.0;
  auto K = [](double t) { return 0.3 + 0.7 * t / 2.0; };
  for (long n : {10L, 100L, 10000L}) {
    const double nd = static_cast<double>(n);
    auto f = [&](double t) { return nd * log_pow_integrand_guard(K(t), n - 1) * 0.35; };
    QuadratureConfig cfg;
    const QuadResult r = integrate(f, 0.0, tau, cfg, peaked_mesh(cfg, n));
    EXPECT_NEAR(r.value, 1.0 - std::pow(0.3, nd), 1e-6) << "n=" << n;
  }
}

TEST(Quadrature, GradedAndUniformMeshesAgree) {
  const long n = 500;
  auto f = [&](double t) { return 500.0 * pow_one_minus(1.0 - t, n - 1); };
  QuadratureConfig cfg;
  const double graded = integrate(f, 0.0, 1.0, cfg, Mesh::RightGraded).value;
  const double uniform = integrate(f, 0.0, 1.0, cfg, Mesh::Uniform).value;
  EXPECT_NEAR(graded, 1.0, 1e-8);
  EXPECT_NEAR(graded, uniform, 1e-8);
}

TEST(Quadrature, BudgetExhaustionCarriesBestEstimate) {
  QuadratureConfig cfg;
  cfg.max_subdivisions = 10;
  cfg.abs_tol = 1e-15;
  cfg.rel_tol = 1e-15;
  try {
    integrate([](double x) { return std::sin(1.0 / (x + 1e-4)); }, 0.0, 1.0, cfg);
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_TRUE(std::isfinite(e.best_estimate()));
    EXPECT_GT(e.achieved_error(), 0.0);
  }
}

TEST(Quadrature, ConfigValidation) {
  QuadratureConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.abs_tol = 0.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.max_subdivisions = 5;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(Quadrature, VectorIntegrandMatchesScalar) {
  auto f = [](double x, std::span<double> out) {
    out[0] = std::exp(x);
    out[1] = x * x;
    out[2] = std::cos(3.0 * x);
  };
  const VectorQuadResult r = integrate_vector(f, 3, 0.0, 2.0);
  EXPECT_NEAR(r.value[0], std::exp(2.0) - 1.0, 1e-10);
  EXPECT_NEAR(r.value[1], 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.value[2], std::sin(6.0) / 3.0, 1e-10);
}

TEST(LogPowGuard, Examples) {
  EXPECT_EQ(log_pow_integrand_guard(1.0, 7), 1.0);
  EXPECT_EQ(log_pow_integrand_guard(0.0, 3), 0.0);
  EXPECT_EQ(log_pow_integrand_guard(0.0, 0), 1.0);
  // repeated-squaring oracle for 0.999^20000
  double result = 1.0, base = 0.999;
  for (long e = 20000; e > 0; e >>= 1) {
    if (e & 1) result *= base;
    base *= base;
  }
  EXPECT_NEAR(log_pow_integrand_guard(0.999, 20000) / result, 1.0, 1e-10);
  EXPECT_NEAR(log_pow_integrand_guard(0.999, 20000), std::exp(20000.0 * std::log(0.999)), 1e-20);
}

TEST(LogPowGuard, MonotoneAndDomain) {
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = log_pow_integrand_guard(i / 1000.0, 50);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_NO_THROW(log_pow_integrand_guard(1.0 + 1e-13, 4));
  EXPECT_THROW(log_pow_integrand_guard(1.01, 4), DomainError);
  EXPECT_THROW(log_pow_integrand_guard(-0.1, 4), DomainError);
}

TEST(PowOneMinus, MatchesDirectPower) {
  for (double d : {0.0, 1e-12, 1e-4, 0.3, 1.0}) {
    EXPECT_NEAR(pow_one_minus(d, 100), std::pow(1.0 - d, 100), 1e-14);
  }
}

TEST(InvertMonotone, Examples) {
  EXPECT_NEAR(invert_monotone([](double x) { return x; }, 0.95, 0.0, 1.0), 0.95, 1e-7);
  EXPECT_NEAR(invert_monotone([](double x) { return x * x; }, 0.25, 0.0, 1.0), 0.5, 1e-6);
  EXPECT_THROW(invert_monotone([](double x) { return x; }, 1.5, 0.0, 1.0), BracketError);
}

TEST(CumulativeIntegral, MatchesDirectQuadratureAtRandomPoints) {
  auto f = [](double w) { return 1.0 - 0.7 * (1.0 - std::exp(-w)) + 0.1 * std::abs(w - 0.3); };
  const CumulativeIntegral table(f, 0.0, 1.0, {0.3});
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    const double direct = integrate(f, a, b, {1e-13, 1e-12, 2000, true}).value;
    EXPECT_NEAR(table.between(a, b), direct, 1e-8);
    EXPECT_NEAR(table(b) - table(a), direct, 1e-8);
  }
}
