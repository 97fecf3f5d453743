#pragma once

// Numeric polylogarithm Li_s(w) for integer s >= 0 on [0, inf], with the
// extended-real convention Li_s(w) = +inf outside the disc of convergence.

#include <array>
#include <cmath>
#include <limits>

#include "charpoint/rational.hpp"

namespace charpoint {

namespace detail {

/// zeta(s) for integer s != 1; nonpositive arguments use exact Bernoulli numbers.
inline double zeta_integer(int s) {
  constexpr int kMax = 96;
  static const std::array<double, kMax + 2> bernoulli = [] {
    // B_n from sum_{j<=n} C(n+1, j) B_j = 0, B_0 = 1.
    std::array<Rational, kMax + 2> b;
    b[0] = 1;
    for (int n = 1; n <= kMax + 1; ++n) {
      Rational acc = 0;
      BigInt binom = 1;  // C(n+1, j)
      for (int j = 0; j < n; ++j) {
        acc += binom * b[j];
        binom = binom * (n + 1 - j) / (j + 1);
      }
      b[n] = -acc / (n + 1);
    }
    std::array<double, kMax + 2> out{};
    for (int n = 0; n <= kMax + 1; ++n) out[n] = b[n].get_d();
    return out;
  }();
  if (s >= 2) return std::riemann_zeta(static_cast<double>(s));
  const int n = -s;
  if (n + 1 > kMax + 1) return std::numeric_limits<double>::quiet_NaN();
  const double v = bernoulli[n + 1] / (n + 1);
  return (n % 2 == 0) ? v : -v;  // zeta(-n) = (-1)^n B_{n+1}/(n+1), with B_1 = -1/2
}

}  // namespace detail

inline double polylog_value(int s, double w) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!(w >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (w == 0.0) return 0.0;
  if (w > 1.0) return inf;
  if (s <= 0) {
    if (w == 1.0) return inf;
    // Li_0(w) = w/(1-w); Li_{-n} follows from w d/dw but is not needed here.
    if (s == 0) return w / (1.0 - w);
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (s == 1) return w == 1.0 ? inf : -std::log1p(-w);
  if (w == 1.0) return detail::zeta_integer(s);

  if (w <= 0.75) {
    double sum = 0.0, wk = 1.0;
    for (int k = 1; k < 4000; ++k) {
      wk *= w;
      double term = wk / std::pow(static_cast<double>(k), s);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  }

  // Expansion about w = 1 in mu = log w:
  //   Li_s(e^mu) = mu^{s-1}/(s-1)! (H_{s-1} - log(-mu)) + sum_{k != s-1} zeta(s-k) mu^k / k!
  const double mu = std::log(w);
  double harmonic = 0.0;
  for (int j = 1; j <= s - 1; ++j) harmonic += 1.0 / j;
  double sum = 0.0;
  double mu_pow = 1.0, fact = 1.0;
  for (int k = 0; k < 80; ++k) {
    if (k > 0) {
      mu_pow *= mu;
      fact *= k;
    }
    double coef = mu_pow / fact;
    if (k == s - 1) {
      sum += coef * (harmonic - std::log(-mu));
      continue;
    }
    const double term = detail::zeta_integer(s - k) * coef;
    sum += term;
    // zeta vanishes at negative even integers, so only nonzero terms can end the sum.
    if (k > s + 2 && term != 0.0 && std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

/// d-th derivative of Li_s at w. The first derivative is Li_{s-1}(w)/w; higher
/// ones are summed termwise, which is adequate away from w = 1.
inline double polylog_derivative(int s, unsigned d, double w) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (d == 0) return polylog_value(s, w);
  if (!(w >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (w > 1.0) return inf;
  if (w == 0.0) {
    double c = 1.0;
    for (unsigned j = 2; j <= d; ++j) c *= j;
    return c / std::pow(static_cast<double>(d), s);
  }
  if (d == 1) return polylog_value(s - 1, w) / w;
  if (w == 1.0 && s - static_cast<int>(d) <= 1) return inf;
  double sum = 0.0;
  for (long n = 0; n < 20000000; ++n) {
    const double k = static_cast<double>(n + d);
    // (n+d)!/n! / k^s * w^n in log space
    double lg = n > 0 ? n * std::log(w) : 0.0;
    for (unsigned j = 1; j <= d; ++j) lg += std::log(static_cast<double>(n + j));
    lg -= s * std::log(k);
    const double term = std::exp(lg);
    sum += term;
    if (n > 8 && term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace charpoint
