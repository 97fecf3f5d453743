#include <gtest/gtest.h>

#include <cmath>

#include "charpoint/asympt.hpp"
#include "charpoint/registry.hpp"

using namespace charpoint;

namespace {

StandardSolution solve(const std::string& text, unsigned N) { return solve_coefficients(parse(text), N); }

StandardSolution registry_solution(const std::string& key, unsigned N) {
  return solve(find_registry_entry(key)->text, N);
}

// hand-built coefficient sequence, no solver involved
StandardSolution synthetic(const Coefficients& c) {
  StandardSolution s;
  s.coefficients.push_back(c);
  s.support_stride.push_back(detail::support_stride_of(c));
  s.order = static_cast<unsigned>(c.size() - 1);
  return s;
}

// t_n = 3^n / n^2: rho = 1/3, alpha = 2 exactly
Coefficients power_law(unsigned N) {
  Coefficients c(N + 1, Rational(0));
  BigInt p = 1;
  for (unsigned n = 1; n <= N; ++n) {
    p *= 3;
    c[n] = Rational(p, BigInt(n) * n);
    c[n].canonicalize();
  }
  return c;
}

}  // namespace

TEST(EstimateRadius, Catalan) {
  const auto sol = solve("y = x*(1 + y^2);\n", 2000);
  ASSERT_EQ(sol.support_stride[0], 2u);
  for (unsigned n = 0; n <= 2000; n += 2) EXPECT_EQ(sol.coefficients[0][n], 0) << n;
  EXPECT_NEAR(estimate_radius(sol, 0), 0.5, 0.5e-3);
}

TEST(EstimateRadius, Examples) {
  EXPECT_NEAR(estimate_radius(solve("y = x*(1 + 2*y + 2*y^2);\n", 2000), 0), (std::sqrt(2.0) - 1) / 2, 0.2071e-3);
  EXPECT_NEAR(estimate_radius(solve("y = x*(1 + 9*y^2);\n", 2000), 0), 1.0 / 6, 1e-3 / 6);
}

TEST(EstimateRadius, SyntheticPowerLaw) {
  // Richardson removes the 1/n term of the ratio; the rest is O(1/n^2)
  EXPECT_NEAR(estimate_radius(synthetic(power_law(400)), 0), 1.0 / 3, 1e-5);
}

TEST(EstimateRadius, Errors) {
  // stride 2 leaves 150 nonzero coefficients below order 300
  EXPECT_THROW(estimate_radius(solve("y = x*(1 + y^2);\n", 300), 0), AsymptError);
  EXPECT_NO_THROW(estimate_radius(solve("y = x*(1 + y^2);\n", 400), 0));
  EXPECT_THROW(estimate_radius(solve("y = x*(1 + y^2);\n", 400), 1), AsymptError);
  Coefficients c = power_law(300);
  c[250] = -1;
  EXPECT_THROW(estimate_radius(synthetic(c), 0), AsymptError);
}

TEST(FitExponent, Catalan) {
  const auto sol = solve("y = x*(1 + y^2);\n", 2000);
  const auto fit = fit_exponent(sol, 0, 0.5);
  EXPECT_NEAR(fit.exponent_hat, 1.5, 0.05);
  EXPECT_EQ(fit.stride, 2u);
  EXPECT_EQ(fit.window_lo, 1000u);
  EXPECT_EQ(fit.window_hi, 2000u);
  // C(k) ~ 4^k / (sqrt(pi) k^1.5) with n = 2k+1: C = 2^1.5 / (2 sqrt(pi))
  EXPECT_NEAR(fit.C_hat, std::sqrt(2.0 / M_PI), 0.02);
  EXPECT_FALSE(fit.out_of_family);
  EXPECT_LT(fit.fit_residual, 1e-3);
}

TEST(FitExponent, FourthRoot) {
  const auto sol = registry_solution("ex-3.6", 2000);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(fit_exponent(sol, i, 1.0 / 6).exponent_hat, 1.25, 0.05) << i;
}

TEST(FitExponent, SyntheticPowerLaw) {
  const auto fit = fit_exponent(synthetic(power_law(1000)), 0, 1.0 / 3);
  EXPECT_NEAR(fit.exponent_hat, 2.0, 1e-9);
  EXPECT_NEAR(fit.C_hat, 1.0, 1e-9);
  EXPECT_LT(fit.fit_residual, 1e-10);
}

TEST(FitExponent, Geometric) {
  Coefficients c(501, Rational(0));
  for (unsigned n = 1; n <= 500; ++n) c[n] = Rational(BigInt(1) << n);
  const auto fit = fit_exponent(synthetic(c), 0, 0.5);
  EXPECT_NEAR(fit.exponent_hat, 0.0, 1e-9);
  EXPECT_TRUE(fit.out_of_family);
}

TEST(FitExponent, Errors) {
  const auto sol = solve("y = x*(1 + y^2);\n", 400);
  EXPECT_THROW(fit_exponent(sol, 0, 0.0), AsymptError);
  EXPECT_THROW(fit_exponent(sol, 0, -1.0), AsymptError);
  EXPECT_THROW(fit_exponent(sol, 0, NAN), AsymptError);
  EXPECT_THROW(fit_exponent(solve("y = x*(1 + y^2);\n", 300), 0, 0.5), AsymptError);
}

// ---------------------------------------------------------------- properties

TEST(AsymptProperties, StableUnderDoublingTheWindow) {
  for (const char* key : {"ex-3.1", "ex-3.2", "ex-4.1"}) {
    const auto a = fit_exponent(registry_solution(key, 1000), 0, find_registry_entry(key)->extreme->coords[0].value);
    const auto b = fit_exponent(registry_solution(key, 2000), 0, find_registry_entry(key)->extreme->coords[0].value);
    EXPECT_LT(std::fabs(a.exponent_hat - b.exponent_hat), 0.03) << key;
  }
}

TEST(AsymptProperties, RadiusAgreesWithEigenpoint) {
  for (const char* key : {"ex-3.1", "ex-3.2", "ex-4.1", "ex-5.4"}) {
    const auto sol = registry_solution(key, 2000);
    const double rho = find_registry_entry(key)->extreme->coords[0].value;
    for (std::size_t i = 0; i < sol.arity(); ++i)
      EXPECT_LT(std::fabs(estimate_radius(sol, i) - rho) / rho, 1e-2) << key << " component " << i;
  }
}

TEST(AsymptProperties, ComponentsShareTheRadius) {
  for (const char* key : {"ex-4.1", "ex-5.4", "sec-4.1"}) {
    const auto sol = registry_solution(key, 2000);
    const double r0 = estimate_radius(sol, 0);
    for (std::size_t i = 1; i < sol.arity(); ++i)
      EXPECT_LT(std::fabs(estimate_radius(sol, i) - r0) / r0, 2e-2) << key << " component " << i;
  }
}
