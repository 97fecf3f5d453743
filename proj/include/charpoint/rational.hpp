#pragma once

// Exact rational coefficients backed by GMP.

#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace charpoint {

using Rational = mpq_class;
using BigInt = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Parses "12", "0.25" or "3/4". Signs are rejected; callers handle them.
inline Rational parse_rational(std::string_view text) {
  auto all_digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    BigInt d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational r(BigInt(std::string(num), 10), d);
    r.canonicalize();
    return r;
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || !all_digits(frac))
      throw std::invalid_argument("malformed decimal '" + std::string(text) + "'");
    std::string digits = std::string(whole) + std::string(frac);
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational r(BigInt(digits, 10), den);
    r.canonicalize();
    return r;
  }
  if (!all_digits(text)) throw std::invalid_argument("malformed integer '" + std::string(text) + "'");
  return Rational(BigInt(std::string(text), 10));
}

/// Natural log of |z|, safe for integers far beyond the binary64 range.
inline double log_abs(const BigInt& z) {
  if (z == 0) return -std::numeric_limits<double>::infinity();
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

inline double log_abs(const Rational& q) { return log_abs(q.get_num()) - log_abs(q.get_den()); }

/// Converts to binary64, saturating to +-inf instead of producing garbage.
inline double to_double(const Rational& q) {
  if (q == 0) return 0.0;
  double lg = log_abs(q);
  if (lg > 709.0) return q > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  if (lg < -745.0) return 0.0;
  return q.get_d();
}

}  // namespace charpoint
