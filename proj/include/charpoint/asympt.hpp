#pragma once

// Radius and singular exponent from the coefficients alone:
// t_n ~ C rho^-n n^-alpha on the support of t.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "charpoint/rational.hpp"
#include "charpoint/solve.hpp"

namespace charpoint {

class AsymptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AsymptoticFit {
  double rho_hat = 0.0;       // the rho the fit was made against
  double exponent_hat = 0.0;  // alpha
  double C_hat = 0.0;
  unsigned stride = 1;
  std::size_t window_lo = 0, window_hi = 0;
  double fit_residual = 0.0;  // rms of log t_n about the fitted line on the window
  std::vector<double> window_exponents;  // slopes on [N/8, N/4], [N/4, N/2], [N/2, N]
  bool out_of_family = false;            // alpha near 0: geometric growth, no singular factor
};

inline constexpr std::size_t kMinNonzero = 200;

namespace detail {

// log t_n for every n (NaN off the support); t_n is far past binary64 range
// for large n, so everything stays in log space.
inline std::vector<double> log_coefficients(const StandardSolution& sol, std::size_t component) {
  if (component >= sol.arity()) throw AsymptError("component " + std::to_string(component) + " out of range");
  const Coefficients& c = sol.coefficients[component];
  std::vector<double> out(c.size(), std::nan(""));
  std::size_t nonzero = 0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (sgn(c[n]) < 0) throw AsymptError("coefficient " + std::to_string(n) + " is negative");
    if (sgn(c[n]) == 0) continue;
    out[n] = log_abs(c[n]);
    ++nonzero;
  }
  if (nonzero < kMinNonzero)
    throw AsymptError("only " + std::to_string(nonzero) + " nonzero coefficients; need at least " +
                      std::to_string(kMinNonzero));
  return out;
}

// least squares y = p + q u
struct Line {
  double intercept, slope, rms;
};

inline Line fit_line(const std::vector<double>& u, const std::vector<double>& y) {
  const double n = static_cast<double>(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double suu = 0, suy = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suy += (u[i] - mu) * (y[i] - my);
  }
  const double q = suy / suu, p = my - q * mu;
  double ss = 0;
  for (std::size_t i = 0; i < u.size(); ++i) ss += std::pow(y[i] - p - q * u[i], 2);
  return {p, q, std::sqrt(ss / n)};
}

}  // namespace detail

/// rho from the stride-aware ratios q_n = (t_n / t_{n+s})^(1/s), s = lcm(stride, 2),
/// with one Richardson step: q_n ~ rho (1 + alpha/n), so (n q_n - m q_m)/(n - m)
/// removes the 1/n term.
inline double estimate_radius(const StandardSolution& sol, std::size_t component = 0) {
  const std::vector<double> L = detail::log_coefficients(sol, component);
  const unsigned stride = sol.support_stride[component];
  const std::size_t s = std::lcm<std::size_t>(stride, 2);
  const std::size_t N = L.size() - 1;
  auto ratio = [&](std::size_t n) { return std::exp((L[n] - L[n + s]) / static_cast<double>(s)); };
  std::size_t n = N - s;
  while (n > s && (std::isnan(L[n]) || std::isnan(L[n + s]))) --n;
  const std::size_t m = n - s;
  if (n <= s || std::isnan(L[m])) throw AsymptError("no usable ratio pairs at the end of the support");
  const double qn = ratio(n), qm = ratio(m);
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return (dn * qn - dm * qm) / (dn - dm);
}

/// alpha from the slope of log(t_n rho^n) against log n, on the residue class
/// mod lcm(stride, 2) of the last nonzero coefficient. Fits run on
/// [N/8, N/4], [N/4, N/2] and [N/2, N]; the three slopes are
/// Aitken-extrapolated, since the correction to the slope decays like a power
/// of n.
inline AsymptoticFit fit_exponent(const StandardSolution& sol, std::size_t component, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw AsymptError("fit_exponent: rho must be positive");
  const std::vector<double> L = detail::log_coefficients(sol, component);
  const std::size_t N = L.size() - 1;
  const double lr = std::log(rho);
  const std::size_t s = std::lcm<std::size_t>(sol.support_stride[component], 2);
  std::size_t last = N;
  while (last > 0 && std::isnan(L[last])) --last;

  auto window = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> u, y;
    for (std::size_t n = std::max<std::size_t>(lo, 1); n <= hi; ++n) {
      if (std::isnan(L[n]) || n % s != last % s) continue;
      u.push_back(std::log(static_cast<double>(n)));
      y.push_back(L[n] + static_cast<double>(n) * lr);
    }
    if (u.size() < 8) throw AsymptError("fit_exponent: too few coefficients in [" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + "]");
    return std::make_pair(u, y);
  };

  AsymptoticFit fit;
  fit.rho_hat = rho;
  fit.stride = sol.support_stride[component];
  for (std::size_t hi : {N / 4, N / 2, N}) {
    const auto [u, y] = window(hi / 2, hi);
    fit.window_exponents.push_back(-detail::fit_line(u, y).slope);
  }
  const double a0 = fit.window_exponents[0], a1 = fit.window_exponents[1], a2 = fit.window_exponents[2];
  const double denom = (a2 - a1) - (a1 - a0);
  double alpha = a2;
  // Aitken only when the slopes settle monotonically
  if (denom != 0.0 && (a2 - a1) * (a1 - a0) > 0.0 && std::fabs(a2 - a1) < std::fabs(a1 - a0)) {
    alpha = a2 - (a2 - a1) * (a2 - a1) / denom;
  }
  fit.exponent_hat = alpha;

  fit.window_lo = N / 2;
  fit.window_hi = N;
  const auto [u, y] = window(N / 2, N);
  double sum = 0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += y[i] + alpha * u[i];
  const double logC = sum / static_cast<double>(u.size());
  double ss = 0;
  for (std::size_t i = 0; i < u.size(); ++i) ss += std::pow(y[i] + alpha * u[i] - logC, 2);
  fit.fit_residual = std::sqrt(ss / static_cast<double>(u.size()));
  fit.C_hat = std::exp(logC);
  fit.out_of_family = alpha < 0.5;
  return fit;
}

}  // namespace charpoint
