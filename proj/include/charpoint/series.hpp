#pragma once

// Truncated multivariate formal power series with exact rational coefficients.
//
// A MultiSeries over k variables stores the coefficients of every monomial of
// total degree <= order(). Absent keys are zero. Coefficients above order()
// are unknown, so every binary operation truncates to the smaller order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "charpoint/rational.hpp"

namespace charpoint {

using ExponentVec = std::vector<unsigned>;

class SeriesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline unsigned total_degree(const ExponentVec& e) { return std::accumulate(e.begin(), e.end(), 0u); }

class MultiSeries {
 public:
  using TermMap = std::map<ExponentVec, Rational>;

  MultiSeries(std::size_t nvars, unsigned order) : nvars_(nvars), order_(order) {
    if (nvars == 0) throw SeriesError("a series needs at least one variable");
  }

  static MultiSeries constant(std::size_t nvars, unsigned order, const Rational& c) {
    MultiSeries s(nvars, order);
    s.set(ExponentVec(nvars, 0), c);
    s.nonneg_ = c >= 0;
    return s;
  }

  static MultiSeries variable(std::size_t nvars, unsigned order, std::size_t j) {
    if (j >= nvars) throw SeriesError("variable index out of range");
    MultiSeries s(nvars, order);
    ExponentVec e(nvars, 0);
    e[j] = 1;
    s.set(e, Rational(1));
    return s;
  }

  /// Univariate series from a dense coefficient list c[0..].
  static MultiSeries from_coefficients(const std::vector<Rational>& c, unsigned order) {
    MultiSeries s(1, order);
    bool nonneg = true;
    for (std::size_t n = 0; n < c.size() && n <= order; ++n) {
      if (c[n] < 0) nonneg = false;
      s.set(ExponentVec{static_cast<unsigned>(n)}, c[n]);
    }
    s.nonneg_ = nonneg;
    return s;
  }

  std::size_t nvars() const { return nvars_; }
  unsigned order() const { return order_; }
  bool nonneg() const { return nonneg_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Rational coeff(const ExponentVec& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Dense coefficient list of a univariate series, length order()+1.
  std::vector<Rational> dense() const {
    if (nvars_ != 1) throw SeriesError("dense() requires a univariate series");
    std::vector<Rational> out(order_ + 1);
    for (const auto& [e, c] : terms_) out[e[0]] = c;
    return out;
  }

  /// Adds c to the coefficient of x^e; drops the term if it cancels.
  /// Terms above the truncation order are ignored.
  void accumulate(const ExponentVec& e, const Rational& c) {
    if (e.size() != nvars_) throw SeriesError("exponent vector has wrong length");
    if (c == 0 || total_degree(e) > order_) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (inserted) {
      it->second.canonicalize();
    } else {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
    if (c < 0) nonneg_ = false;
  }

  void set(const ExponentVec& e, const Rational& c) {
    if (e.size() != nvars_) throw SeriesError("exponent vector has wrong length");
    if (total_degree(e) > order_) return;
    if (c == 0) {
      terms_.erase(e);
      return;
    }
    Rational& slot = terms_[e];
    slot = c;
    slot.canonicalize();
    if (c < 0) nonneg_ = false;
  }

  MultiSeries truncated(unsigned order) const {
    MultiSeries out(nvars_, std::min(order, order_));
    for (const auto& [e, c] : terms_)
      if (total_degree(e) <= out.order_) out.terms_.emplace(e, c);
    out.nonneg_ = nonneg_;
    return out;
  }

  /// Lowest total degree carrying a nonzero coefficient (order()+1 if zero).
  unsigned valuation() const {
    unsigned v = order_ + 1;
    for (const auto& [e, c] : terms_) v = std::min(v, total_degree(e));
    return v;
  }

  bool operator==(const MultiSeries& other) const {
    return nvars_ == other.nvars_ && order_ == other.order_ && terms_ == other.terms_;
  }

  // Propagated flag: set by construction and by closure of the operations.
  void set_nonneg_flag(bool f) { nonneg_ = f; }

 private:
  std::size_t nvars_;
  unsigned order_;
  TermMap terms_;
  bool nonneg_ = true;
};

/// Human-readable sum of terms, e.g. "1 + 2*x0^2*x1".
inline std::string to_string(const MultiSeries& s) {
  if (s.is_zero()) return "0 + O(" + std::to_string(s.order() + 1) + ")";
  std::string out;
  for (const auto& [e, c] : s.terms()) {
    if (!out.empty()) out += " + ";
    out += to_string(c);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      out += "*x" + std::to_string(i);
      if (e[i] > 1) out += "^" + std::to_string(e[i]);
    }
  }
  return out + " + O(" + std::to_string(s.order() + 1) + ")";
}

inline std::ostream& operator<<(std::ostream& os, const MultiSeries& s) { return os << to_string(s); }

namespace detail {
inline void require_same_nvars(const MultiSeries& a, const MultiSeries& b) {
  if (a.nvars() != b.nvars())
    throw SeriesError("variable-count mismatch (" + std::to_string(a.nvars()) + " vs " +
                      std::to_string(b.nvars()) + ")");
}
}  // namespace detail

inline MultiSeries add(const MultiSeries& a, const MultiSeries& b) {
  detail::require_same_nvars(a, b);
  MultiSeries out = a.truncated(std::min(a.order(), b.order()));
  for (const auto& [e, c] : b.terms()) out.accumulate(e, c);
  out.set_nonneg_flag(a.nonneg() && b.nonneg());
  return out;
}

inline MultiSeries scale(const MultiSeries& a, const Rational& k) {
  MultiSeries out(a.nvars(), a.order());
  if (k != 0)
    for (const auto& [e, c] : a.terms()) out.set(e, c * k);
  out.set_nonneg_flag(a.nonneg() && k >= 0);
  return out;
}

inline MultiSeries mul(const MultiSeries& a, const MultiSeries& b) {
  detail::require_same_nvars(a, b);
  const unsigned order = std::min(a.order(), b.order());
  MultiSeries out(a.nvars(), order);
  ExponentVec e(a.nvars());
  for (const auto& [ea, ca] : a.terms()) {
    const unsigned da = total_degree(ea);
    if (da > order) continue;
    for (const auto& [eb, cb] : b.terms()) {
      if (da + total_degree(eb) > order) continue;
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out.accumulate(e, ca * cb);
    }
  }
  out.set_nonneg_flag(a.nonneg() && b.nonneg());
  return out;
}

inline MultiSeries power(const MultiSeries& a, unsigned k) {
  MultiSeries result = MultiSeries::constant(a.nvars(), a.order(), Rational(1));
  MultiSeries base = a;
  while (k > 0) {
    if (k & 1u) result = mul(result, base);
    k >>= 1u;
    if (k > 0) base = mul(base, base);
  }
  result.set_nonneg_flag(a.nonneg());
  return result;
}

/// Formal composition C(x) = A(B_1(x), ..., B_m(x)); each B_l must vanish at 0.
inline MultiSeries compose(const MultiSeries& a, const std::vector<MultiSeries>& b) {
  if (b.size() != a.nvars())
    throw SeriesError("compose: expected " + std::to_string(a.nvars()) + " inner series, got " +
                      std::to_string(b.size()));
  if (b.empty()) throw SeriesError("compose: no inner series");
  const std::size_t k = b.front().nvars();
  const unsigned inner_order = b.front().order();
  for (std::size_t l = 0; l < b.size(); ++l) {
    if (b[l].nvars() != k || b[l].order() != inner_order)
      throw SeriesError("compose: inner series must share nvars and order");
    if (b[l].coeff(ExponentVec(k, 0)) != 0)
      throw SeriesError("compose: inner series " + std::to_string(l) + " has a nonzero constant term");
  }
  const unsigned order = std::min(a.order(), inner_order);

  // powers[l][p] = B_l^p, built on demand up to the largest exponent needed.
  std::vector<std::vector<MultiSeries>> powers(b.size());
  auto pow_of = [&](std::size_t l, unsigned p) -> const MultiSeries& {
    auto& cache = powers[l];
    if (cache.empty()) cache.push_back(MultiSeries::constant(k, order, Rational(1)));
    while (cache.size() <= p) cache.push_back(mul(cache.back(), b[l].truncated(order)));
    return cache[p];
  };

  MultiSeries out(k, order);
  for (const auto& [ea, ca] : a.terms()) {
    if (total_degree(ea) > order) continue;  // contributes only above the truncation
    MultiSeries term = MultiSeries::constant(k, order, ca);
    for (std::size_t l = 0; l < ea.size() && !term.is_zero(); ++l)
      if (ea[l] > 0) term = mul(term, pow_of(l, ea[l]));
    for (const auto& [e, c] : term.terms()) out.accumulate(e, c);
  }
  bool nonneg = a.nonneg();
  for (const auto& s : b) nonneg = nonneg && s.nonneg();
  out.set_nonneg_flag(nonneg);
  return out;
}

/// Formal partial derivative with respect to variable j (0-based).
inline MultiSeries partial(const MultiSeries& a, std::size_t j) {
  if (j >= a.nvars())
    throw SeriesError("partial: variable index " + std::to_string(j) + " out of range");
  MultiSeries out(a.nvars(), a.order() == 0 ? 0 : a.order() - 1);
  for (const auto& [e, c] : a.terms()) {
    if (e[j] == 0) continue;
    ExponentVec d = e;
    d[j] -= 1;
    out.accumulate(d, c * e[j]);
  }
  out.set_nonneg_flag(a.nonneg());
  return out;
}

/// exp(A) for A with zero constant term.
inline MultiSeries exp_series(const MultiSeries& a) {
  if (a.coeff(ExponentVec(a.nvars(), 0)) != 0)
    throw SeriesError("exp_series: argument has a nonzero constant term");
  MultiSeries out = MultiSeries::constant(a.nvars(), a.order(), Rational(1));
  MultiSeries term = out;
  for (unsigned k = 1; k <= a.order(); ++k) {
    term = scale(mul(term, a), Rational(1, k));
    if (term.is_zero()) break;
    out = add(out, term);
  }
  out.set_nonneg_flag(a.nonneg());
  return out;
}

/// Univariate d-th derivative of Li_s(w) = sum_{k>=1} w^k / k^s.
/// The coefficient of w^n is (n+d)!/n! / (n+d)^s.
inline MultiSeries polylog_series(int s, unsigned order, unsigned deriv = 0) {
  if (s < 0) throw SeriesError("polylog_series: negative order s");
  MultiSeries out(1, order);
  for (unsigned n = 0; n <= order; ++n) {
    const unsigned k = n + deriv;
    if (k == 0) continue;
    BigInt num = 1, den;
    for (unsigned j = n + 1; j <= k; ++j) num *= j;
    mpz_ui_pow_ui(den.get_mpz_t(), k, static_cast<unsigned long>(s));
    Rational c(num, den);
    c.canonicalize();
    out.set(ExponentVec{n}, c);
  }
  return out;
}

enum class Convergence { converged, diverging, inconclusive };

inline const char* to_string(Convergence c) {
  switch (c) {
    case Convergence::converged: return "converged";
    case Convergence::diverging: return "diverging";
    case Convergence::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Truncated sum with a convergence verdict. value() is +inf when diverging.
struct EvalResult {
  double sum = 0.0;
  Convergence diagnostic = Convergence::inconclusive;
  double tail_increment = 0.0;

  double value() const {
    return diagnostic == Convergence::diverging ? std::numeric_limits<double>::infinity() : sum;
  }
};

/// Sums degree blocks in increasing total degree at a nonnegative point.
///
/// Verdicts use the increments of the nonempty degree blocks: "diverging" when
/// the last three are nondecreasing and each exceeds 1e-3 of the running sum,
/// "converged" when the last is below 1e-12 relative, otherwise "inconclusive".
/// Terms that stop well short of the truncation order mark a polynomial, which
/// is always "converged".
inline EvalResult eval(const MultiSeries& a, std::span<const double> point) {
  if (point.size() != a.nvars()) throw SeriesError("eval: point has wrong dimension");
  for (double p : point)
    if (!(p >= 0.0)) throw SeriesError("eval: negative or NaN coordinate");

  std::map<unsigned, double> blocks;
  for (const auto& [e, c] : a.terms()) {
    // log space: coefficients can overflow binary64 while the term does not
    double lg = log_abs(c);
    bool zero = false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (point[i] == 0.0) {
        zero = true;
        break;
      }
      lg += static_cast<double>(e[i]) * std::log(point[i]);
    }
    double term = zero ? 0.0 : std::exp(lg);
    blocks[total_degree(e)] += c < 0 ? -term : term;
  }

  EvalResult r;
  if (blocks.empty()) {
    r.diagnostic = Convergence::converged;
    return r;
  }
  std::vector<double> incs;
  unsigned max_gap = 1, prev = 0;
  bool first = true;
  for (const auto& [deg, v] : blocks) {
    if (!first) max_gap = std::max(max_gap, deg - prev);
    prev = deg;
    first = false;
    incs.push_back(v);
    r.sum += v;
  }
  r.tail_increment = incs.back();
  if (!std::isfinite(r.sum)) {
    r.diagnostic = Convergence::diverging;
    return r;
  }
  const unsigned last_degree = blocks.rbegin()->first;
  if (last_degree + max_gap <= a.order()) {
    r.diagnostic = Convergence::converged;
    return r;
  }
  const std::size_t n = incs.size();
  if (n >= 3) {
    bool nondecreasing = incs[n - 3] <= incs[n - 2] && incs[n - 2] <= incs[n - 1];
    bool large = true;
    for (std::size_t i = n - 3; i < n; ++i) large = large && incs[i] > 1e-3 * std::fabs(r.sum);
    if (nondecreasing && large) {
      r.diagnostic = Convergence::diverging;
      return r;
    }
  }
  if (std::fabs(incs.back()) <= 1e-12 * std::fabs(r.sum))
    r.diagnostic = Convergence::converged;
  else
    r.diagnostic = Convergence::inconclusive;
  return r;
}

}  // namespace charpoint
