#pragma once

// Expression trees for right-hand sides G_i(x, y_1, ..., y_m).
//
// Nodes are immutable and shared. Aux nodes refer to let-bound series by their
// index in the owning system's aux table.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <quadmath.h>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "charpoint/polylog.hpp"
#include "charpoint/rational.hpp"
#include "charpoint/series.hpp"

namespace charpoint {

enum class NodeKind { constant, x, y, aux, add, mul, pow, exp, polylog };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  NodeKind kind = NodeKind::constant;
  Rational value;          // constant
  std::size_t index = 0;   // y or aux index, 0-based
  std::string name;        // aux display name
  unsigned exponent = 1;   // pow
  int s = 0;               // polylog order
  unsigned deriv = 0;      // polylog derivative count (internal, from differentiation)
  std::vector<ExprPtr> kids;
};

inline ExprPtr make_const(const Rational& c) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::constant;
  e->value = c;
  return e;
}
inline ExprPtr make_const(long c) { return make_const(Rational(c)); }

inline ExprPtr make_x() {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::x;
  return e;
}

inline ExprPtr make_y(std::size_t j) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::y;
  e->index = j;
  return e;
}

inline ExprPtr make_aux(std::size_t k, std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::aux;
  e->index = k;
  e->name = std::move(name);
  return e;
}

inline ExprPtr make_nary(NodeKind kind, std::vector<ExprPtr> kids) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->kids = std::move(kids);
  return e;
}
inline ExprPtr make_add(std::vector<ExprPtr> kids) { return make_nary(NodeKind::add, std::move(kids)); }
inline ExprPtr make_mul(std::vector<ExprPtr> kids) { return make_nary(NodeKind::mul, std::move(kids)); }

inline ExprPtr make_pow(ExprPtr base, unsigned k) {
  if (k == 0) throw std::invalid_argument("power exponent must be positive");
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::pow;
  e->exponent = k;
  e->kids = {std::move(base)};
  return e;
}

inline ExprPtr make_exp(ExprPtr arg) { return make_nary(NodeKind::exp, {std::move(arg)}); }

inline ExprPtr make_polylog(int s, ExprPtr arg, unsigned deriv = 0) {
  auto e = std::make_shared<Expr>();
  e->kind = NodeKind::polylog;
  e->s = s;
  e->deriv = deriv;
  e->kids = {std::move(arg)};
  return e;
}

inline bool is_const(const ExprPtr& e, const Rational& c) {
  return e->kind == NodeKind::constant && e->value == c;
}

// ---------------------------------------------------------------- printing

struct PrintOptions {
  bool plain_y = false;  // print y instead of y1 (1-equation systems)
};

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.kind) {
    case NodeKind::add: return 1;
    case NodeKind::mul: return 2;
    case NodeKind::pow: return 3;
    case NodeKind::constant: return e.value.get_den() == 1 ? 4 : 2;
    default: return 4;
  }
}

inline void print_to(std::string& out, const Expr& e, const PrintOptions& opt);

inline void print_child(std::string& out, const Expr& child, int min_prec, const PrintOptions& opt) {
  const bool wrap = precedence(child) < min_prec;
  if (wrap) out += '(';
  print_to(out, child, opt);
  if (wrap) out += ')';
}

inline void print_to(std::string& out, const Expr& e, const PrintOptions& opt) {
  switch (e.kind) {
    case NodeKind::constant: out += to_string(e.value); return;
    case NodeKind::x: out += 'x'; return;
    case NodeKind::y:
      out += opt.plain_y ? std::string("y") : "y" + std::to_string(e.index + 1);
      return;
    case NodeKind::aux: out += e.name; return;
    case NodeKind::add:
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += " + ";
        print_child(out, *e.kids[i], 1, opt);
      }
      return;
    case NodeKind::mul:
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += '*';
        print_child(out, *e.kids[i], 2, opt);
      }
      return;
    case NodeKind::pow:
      print_child(out, *e.kids[0], 4, opt);
      out += '^';
      out += std::to_string(e.exponent);
      return;
    case NodeKind::exp:
      out += "exp(";
      print_to(out, *e.kids[0], opt);
      out += ')';
      return;
    case NodeKind::polylog:
      out += "polylog";
      if (e.deriv > 0) out += "_d" + std::to_string(e.deriv);
      out += '(' + std::to_string(e.s) + ", ";
      print_to(out, *e.kids[0], opt);
      out += ')';
      return;
  }
}

}  // namespace detail

inline std::string to_string(const ExprPtr& e, const PrintOptions& opt = {}) {
  std::string out;
  detail::print_to(out, *e, opt);
  return out;
}

// ---------------------------------------------------------------- simplification

/// Flattens sums and products, folds constants and drops neutral elements.
/// The order of the remaining children is preserved.
inline ExprPtr simplify(const ExprPtr& e) {
  switch (e->kind) {
    case NodeKind::constant:
    case NodeKind::x:
    case NodeKind::y:
    case NodeKind::aux: return e;
    case NodeKind::add:
    case NodeKind::mul: {
      const bool is_add = e->kind == NodeKind::add;
      std::vector<ExprPtr> flat;
      Rational folded = is_add ? 0 : 1;
      std::ptrdiff_t const_pos = -1;
      auto take = [&](const ExprPtr& c, auto& self) -> void {
        if (c->kind == e->kind) {
          for (const auto& g : c->kids) self(g, self);
        } else if (c->kind == NodeKind::constant) {
          if (const_pos < 0) const_pos = static_cast<std::ptrdiff_t>(flat.size());
          if (is_add) folded += c->value;
          else folded *= c->value;
        } else {
          flat.push_back(c);
        }
      };
      for (const auto& k : e->kids) take(simplify(k), take);
      if (!is_add && folded == 0) return make_const(0);
      const bool neutral = is_add ? folded == 0 : folded == 1;
      if (!neutral && const_pos >= 0) flat.insert(flat.begin() + const_pos, make_const(folded));
      if (flat.empty()) return make_const(folded);
      if (flat.size() == 1) return flat.front();
      return make_nary(e->kind, std::move(flat));
    }
    case NodeKind::pow: {
      ExprPtr b = simplify(e->kids[0]);
      unsigned k = e->exponent;
      if (b->kind == NodeKind::constant) {
        Rational r = 1;
        for (unsigned i = 0; i < k; ++i) r *= b->value;
        return make_const(r);
      }
      if (b->kind == NodeKind::pow) {
        k *= b->exponent;
        b = b->kids[0];
      }
      if (k == 1) return b;
      return make_pow(b, k);
    }
    case NodeKind::exp: {
      ExprPtr a = simplify(e->kids[0]);
      if (is_const(a, 0)) return make_const(1);
      return make_exp(a);
    }
    case NodeKind::polylog: {
      ExprPtr a = simplify(e->kids[0]);
      if (is_const(a, 0)) {
        // value at 0 is the constant coefficient d!/d^s
        if (e->deriv == 0) return make_const(0);
        BigInt num = 1, den;
        for (unsigned j = 2; j <= e->deriv; ++j) num *= j;
        mpz_ui_pow_ui(den.get_mpz_t(), e->deriv, static_cast<unsigned long>(e->s));
        Rational c(num, den);
        c.canonicalize();
        return make_const(c);
      }
      return make_polylog(e->s, a, e->deriv);
    }
  }
  return e;
}

/// simplify() plus sorted children and merged repeated factors, so that
/// structurally equal expressions print identically.
inline ExprPtr canonical(const ExprPtr& e) {
  ExprPtr s = simplify(e);
  switch (s->kind) {
    case NodeKind::add:
    case NodeKind::mul: {
      std::vector<ExprPtr> kids;
      for (const auto& k : s->kids) kids.push_back(canonical(k));
      if (s->kind == NodeKind::mul) {
        std::map<std::string, std::pair<ExprPtr, unsigned>> bases;
        std::vector<ExprPtr> rest;
        for (const auto& k : kids) {
          if (k->kind == NodeKind::constant) {
            rest.push_back(k);
            continue;
          }
          ExprPtr b = k->kind == NodeKind::pow ? k->kids[0] : k;
          unsigned p = k->kind == NodeKind::pow ? k->exponent : 1;
          auto [it, fresh] = bases.try_emplace(to_string(b), b, 0u);
          it->second.second += p;
        }
        for (auto& [key, bp] : bases) rest.push_back(bp.second == 1 ? bp.first : make_pow(bp.first, bp.second));
        kids = std::move(rest);
      }
      std::stable_sort(kids.begin(), kids.end(),
                       [](const ExprPtr& a, const ExprPtr& b) { return to_string(a) < to_string(b); });
      return simplify(make_nary(s->kind, std::move(kids)));
    }
    case NodeKind::pow: return simplify(make_pow(canonical(s->kids[0]), s->exponent));
    case NodeKind::exp: return make_exp(canonical(s->kids[0]));
    case NodeKind::polylog: return make_polylog(s->s, canonical(s->kids[0]), s->deriv);
    default: return s;
  }
}

inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  return to_string(canonical(a)) == to_string(canonical(b));
}

// ---------------------------------------------------------------- rewriting

/// Replaces every leaf for which fn returns non-null.
template <class Fn>
ExprPtr map_leaves(const ExprPtr& e, const Fn& fn) {
  if (e->kids.empty()) {
    ExprPtr r = fn(e);
    return r ? r : e;
  }
  auto copy = std::make_shared<Expr>(*e);
  for (auto& k : copy->kids) k = map_leaves(k, fn);
  return copy;
}

inline ExprPtr substitute_y(const ExprPtr& e, std::size_t j, const ExprPtr& replacement) {
  return map_leaves(e, [&](const ExprPtr& leaf) -> ExprPtr {
    return leaf->kind == NodeKind::y && leaf->index == j ? replacement : nullptr;
  });
}

template <class Pred>
bool any_node(const ExprPtr& e, const Pred& pred) {
  if (pred(*e)) return true;
  for (const auto& k : e->kids)
    if (any_node(k, pred)) return true;
  return false;
}

inline bool mentions_y(const ExprPtr& e, std::size_t j) {
  return any_node(e, [j](const Expr& n) { return n.kind == NodeKind::y && n.index == j; });
}

// ---------------------------------------------------------------- differentiation

struct Var {
  NodeKind kind = NodeKind::x;  // x, y or aux
  std::size_t index = 0;

  static Var x() { return {NodeKind::x, 0}; }
  static Var y(std::size_t j) { return {NodeKind::y, j}; }
  static Var aux(std::size_t k) { return {NodeKind::aux, k}; }
};

/// Partial derivative with respect to one leaf kind; other leaves are constants.
inline ExprPtr derivative(const ExprPtr& e, Var v) {
  switch (e->kind) {
    case NodeKind::constant: return make_const(0);
    case NodeKind::x:
    case NodeKind::y:
    case NodeKind::aux:
      return make_const(e->kind == v.kind && (e->kind == NodeKind::x || e->index == v.index) ? 1 : 0);
    case NodeKind::add: {
      std::vector<ExprPtr> terms;
      for (const auto& k : e->kids) terms.push_back(derivative(k, v));
      return simplify(make_add(std::move(terms)));
    }
    case NodeKind::mul: {
      std::vector<ExprPtr> terms;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        ExprPtr d = derivative(e->kids[i], v);
        if (is_const(d, 0)) continue;
        std::vector<ExprPtr> factors;
        for (std::size_t j = 0; j < e->kids.size(); ++j) factors.push_back(i == j ? d : e->kids[j]);
        terms.push_back(make_mul(std::move(factors)));
      }
      return simplify(make_add(std::move(terms)));
    }
    case NodeKind::pow: {
      ExprPtr d = derivative(e->kids[0], v);
      if (is_const(d, 0)) return d;
      const unsigned k = e->exponent;
      std::vector<ExprPtr> f{make_const(static_cast<long>(k))};
      if (k > 1) f.push_back(make_pow(e->kids[0], k - 1));
      f.push_back(d);
      return simplify(make_mul(std::move(f)));
    }
    case NodeKind::exp: {
      ExprPtr d = derivative(e->kids[0], v);
      if (is_const(d, 0)) return d;
      return simplify(make_mul({e, d}));
    }
    case NodeKind::polylog: {
      ExprPtr d = derivative(e->kids[0], v);
      if (is_const(d, 0)) return d;
      return simplify(make_mul({make_polylog(e->s, e->kids[0], e->deriv + 1), d}));
    }
  }
  return make_const(0);
}

// ---------------------------------------------------------------- numeric evaluation

namespace detail {

inline double scalar_from(const Rational& q, double) { return q.get_d(); }

// num/den limb by limb; binary64 get_d would drop the low bits
inline __float128 scalar_from(const Rational& q, __float128) {
  auto big = [](const BigInt& z) {
    __float128 r = 0;
    const mpz_srcptr p = z.get_mpz_t();
    const int n = static_cast<int>(mpz_size(p));
    for (int i = n - 1; i >= 0; --i) r = r * static_cast<__float128>(18446744073709551616.0) + static_cast<__float128>(mpz_getlimbn(p, i));
    return mpz_sgn(p) < 0 ? -r : r;
  };
  return big(q.get_num()) / big(q.get_den());
}

inline bool scalar_isinf(double v) { return std::isinf(v); }
inline bool scalar_isinf(__float128 v) { return v > FLT128_MAX || v < -FLT128_MAX; }
inline double scalar_exp(double v) { return std::exp(v); }
inline __float128 scalar_exp(__float128 v) { return expq(v); }

// quad-precision polylogs are evaluated in binary64 and widened
inline double scalar_polylog(int s, unsigned d, double w) { return polylog_derivative(s, d, w); }
inline __float128 scalar_polylog(int s, unsigned d, __float128 w) {
  return static_cast<__float128>(polylog_derivative(s, d, static_cast<double>(w)));
}

}  // namespace detail

/// Value on [0, inf] with the convention 0 * inf = 0, for T = double or
/// __float128.
template <class T>
T evaluate_as(const Expr& e, T x, std::span<const T> y, std::span<const T> aux) {
  const T inf = static_cast<T>(std::numeric_limits<double>::infinity());
  switch (e.kind) {
    case NodeKind::constant: return detail::scalar_from(e.value, T{});
    case NodeKind::x: return x;
    case NodeKind::y:
      if (e.index >= y.size()) throw std::out_of_range("evaluate: y index out of range");
      return y[e.index];
    case NodeKind::aux:
      if (e.index >= aux.size()) throw std::out_of_range("evaluate: aux value missing");
      return aux[e.index];
    case NodeKind::add: {
      T s = 0;
      for (const auto& k : e.kids) s += evaluate_as<T>(*k, x, y, aux);
      return s;
    }
    case NodeKind::mul: {
      T p = 1;
      bool has_inf = false;
      for (const auto& k : e.kids) {
        T v = evaluate_as<T>(*k, x, y, aux);
        if (v == 0) return 0;
        if (detail::scalar_isinf(v)) has_inf = true;
        else p *= v;
      }
      return has_inf ? inf : p;
    }
    case NodeKind::pow: {
      const T b = evaluate_as<T>(*e.kids[0], x, y, aux);
      T r = 1, base = b;
      for (unsigned k = e.exponent; k > 0; k >>= 1) {
        if (k & 1u) r *= base;
        if (k > 1) base *= base;
      }
      return r;
    }
    case NodeKind::exp: return detail::scalar_exp(evaluate_as<T>(*e.kids[0], x, y, aux));
    case NodeKind::polylog: {
      const T w = evaluate_as<T>(*e.kids[0], x, y, aux);
      if (detail::scalar_isinf(w)) return inf;
      return detail::scalar_polylog(e.s, e.deriv, w);
    }
  }
  return 0;
}

inline double evaluate(const Expr& e, double x, std::span<const double> y, std::span<const double> aux) {
  return evaluate_as<double>(e, x, y, aux);
}

inline double evaluate(const ExprPtr& e, double x, std::span<const double> y, std::span<const double> aux) {
  return evaluate_as<double>(*e, x, y, aux);
}

// ---------------------------------------------------------------- valuations

inline constexpr unsigned kInfiniteValuation = std::numeric_limits<unsigned>::max() / 4;

/// Lower bound on the x-order of the expression when each y has x-order y_val
/// and each aux series has x-order 1.
inline unsigned x_valuation(const Expr& e, unsigned y_val) {
  auto sat = [](unsigned long long v) {
    return static_cast<unsigned>(std::min<unsigned long long>(v, kInfiniteValuation));
  };
  switch (e.kind) {
    case NodeKind::constant: return e.value == 0 ? kInfiniteValuation : 0;
    case NodeKind::x: return 1;
    case NodeKind::y: return y_val;
    case NodeKind::aux: return 1;
    case NodeKind::add: {
      unsigned v = kInfiniteValuation;
      for (const auto& k : e.kids) v = std::min(v, x_valuation(*k, y_val));
      return v;
    }
    case NodeKind::mul: {
      unsigned long long v = 0;
      for (const auto& k : e.kids) v += x_valuation(*k, y_val);
      return sat(v);
    }
    case NodeKind::pow: return sat(static_cast<unsigned long long>(x_valuation(*e.kids[0], y_val)) * e.exponent);
    case NodeKind::exp: return 0;
    case NodeKind::polylog: {
      if (e.deriv > 0) return 0;
      return x_valuation(*e.kids[0], y_val);
    }
  }
  return 0;
}

// ---------------------------------------------------------------- series

/// Series bound to the leaves of an expression; all share nvars and order.
struct SeriesEnv {
  MultiSeries x;
  std::vector<MultiSeries> y;
  std::vector<MultiSeries> aux;
};

inline MultiSeries to_series(const Expr& e, const SeriesEnv& env) {
  const std::size_t nv = env.x.nvars();
  const unsigned order = env.x.order();
  switch (e.kind) {
    case NodeKind::constant: return MultiSeries::constant(nv, order, e.value);
    case NodeKind::x: return env.x;
    case NodeKind::y:
      if (e.index >= env.y.size()) throw SeriesError("to_series: y index out of range");
      return env.y[e.index];
    case NodeKind::aux:
      if (e.index >= env.aux.size()) throw SeriesError("to_series: aux series missing");
      return env.aux[e.index];
    case NodeKind::add: {
      MultiSeries s(nv, order);
      for (const auto& k : e.kids) s = add(s, to_series(*k, env));
      return s;
    }
    case NodeKind::mul: {
      MultiSeries p = MultiSeries::constant(nv, order, Rational(1));
      for (const auto& k : e.kids) {
        p = mul(p, to_series(*k, env));
        if (p.is_zero()) break;
      }
      return p;
    }
    case NodeKind::pow: return power(to_series(*e.kids[0], env), e.exponent);
    case NodeKind::exp: return exp_series(to_series(*e.kids[0], env));
    case NodeKind::polylog: {
      MultiSeries inner = to_series(*e.kids[0], env);
      return compose(polylog_series(e.s, order, e.deriv), {inner});
    }
  }
  return MultiSeries(nv, order);
}

inline MultiSeries to_series(const ExprPtr& e, const SeriesEnv& env) { return to_series(*e, env); }

}  // namespace charpoint
