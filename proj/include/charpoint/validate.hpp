#pragma once

// Well-conditioning checks (a)-(g) for a parsed system.
//
// (d), (f) and (g) ask whether some power series is nonzero. A nonzero
// coefficient within the probe order settles it; an expression that simplifies
// to 0 settles the opposite; anything else is undecidable at that truncation.
// Series tests collapse every y_j to x: with nonnegative coefficients nothing
// cancels, so the collapsed series is zero iff the multivariate one is.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <string>
#include <stdexcept>
#include <vector>

#include "charpoint/expr.hpp"
#include "charpoint/perron.hpp"
#include "charpoint/series.hpp"
#include "charpoint/solve.hpp"
#include "charpoint/sysdef.hpp"

namespace charpoint {

enum class Verdict { pass, fail, undecidable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::undecidable: return "undecidable-at-truncation";
  }
  return "?";
}

struct ConditionResult {
  Verdict verdict = Verdict::undecidable;
  std::string witness;
};

struct ValidationReport {
  unsigned probe_order = 0;
  ConditionResult a, b, c, d, e, f, g;  // b is the convergence probe replacing holomorphy
  std::vector<std::pair<std::size_t, std::size_t>> jacobian_zeros;  // (i, j) with dG_i/dy_j == 0 at probe order

  bool well_conditioned() const {
    for (const auto* r : {&a, &b, &c, &d, &e, &f, &g})
      if (r->verdict != Verdict::pass) return false;
    return true;
  }
  bool any_fail() const {
    for (const auto* r : {&a, &b, &c, &d, &e, &f, &g})
      if (r->verdict == Verdict::fail) return true;
    return false;
  }
};

namespace detail {

enum class Presence { nonzero, zero, unknown };

struct Collapse {
  SeriesEnv env;
  bool ok = true;
  std::string error;
};

/// y_j -> x (or 0), aux -> its solution series, all univariate to `order`.
inline Collapse collapse_env(const SystemSpec& spec, unsigned order, bool y_zero) {
  const MultiSeries x = MultiSeries::variable(1, order, 0);
  Collapse c{SeriesEnv{x, std::vector<MultiSeries>(spec.arity(), y_zero ? MultiSeries(1, order) : x), {}}, true, {}};
  try {
    for (const auto& a : solve_aux_coefficients(spec, order)) c.env.aux.push_back(MultiSeries::from_coefficients(a, order));
  } catch (const std::exception& e) {
    c.ok = false;
    c.error = e.what();
  }
  return c;
}

/// Lowest degree with a nonzero coefficient, if any.
inline Presence presence(const ExprPtr& e, const Collapse& c, unsigned* degree = nullptr) {
  const ExprPtr s = simplify(e);
  if (is_const(s, Rational(0))) return Presence::zero;
  if (!c.ok) return Presence::unknown;
  try {
    const MultiSeries ser = to_series(s, c.env);
    unsigned best = kInfiniteValuation;
    for (const auto& [exp, v] : ser.terms())
      if (v != 0) best = std::min(best, exp[0]);
    if (best == kInfiniteValuation) return Presence::unknown;
    if (degree) *degree = best;
    return Presence::nonzero;
  } catch (const std::exception&) {
    return Presence::unknown;
  }
}

inline std::string yname(const SystemSpec& spec, std::size_t j) {
  return spec.arity() == 1 ? std::string("y") : "y" + std::to_string(j + 1);
}

inline std::string gname(const SystemSpec& spec, std::size_t i) {
  return spec.arity() == 1 ? std::string("G") : "G" + std::to_string(i + 1);
}

/// Exact determinant by Gaussian elimination over Q.
inline Rational determinant(std::vector<std::vector<Rational>> a) {
  const std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col] == 0) continue;
      const Rational f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  return det;
}

/// Vertices not reachable from `from` along edges.
inline std::vector<std::size_t> unreachable(const std::vector<std::vector<bool>>& edge, std::size_t from) {
  const std::size_t n = edge.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w = 0; w < n; ++w)
      if (edge[v][w] && !seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < n; ++v)
    if (!seen[v]) out.push_back(v);
  return out;
}

}  // namespace detail

/// Dependency digraph i -> j iff dG_i/dy_j is nonzero within the probe order.
/// `unknown` marks derivatives that are not identically 0 yet show no term.
struct DependencyGraph {
  std::vector<std::vector<bool>> edge;
  std::vector<std::vector<bool>> unknown;
};

inline DependencyGraph dependency_graph(const SystemSpec& spec, unsigned probe_order) {
  const std::size_t m = spec.arity();
  const auto c = detail::collapse_env(spec, probe_order, false);
  DependencyGraph g;
  g.edge.assign(m, std::vector<bool>(m, false));
  g.unknown.assign(m, std::vector<bool>(m, false));
  const auto jac = jacobian(spec);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const auto p = detail::presence(jac[i][j], c);
      g.edge[i][j] = p == detail::Presence::nonzero;
      g.unknown[i][j] = p == detail::Presence::unknown;
    }
  return g;
}

inline ValidationReport validate(const SystemSpec& spec, unsigned probe_order) {
  if (probe_order < 2) throw std::invalid_argument("validate: probe_order must be at least 2");
  const std::size_t m = spec.arity();
  ValidationReport rep;
  rep.probe_order = probe_order;

  rep.a = {Verdict::pass, "all literals are nonnegative and only + * ^ exp polylog occur"};

  // (b') convergence at a small positive point
  {
    CompiledSystem cs(spec);
    rep.b = {Verdict::fail, "G diverges at every probe point down to x = y = 1e-12"};
    for (double h = 1e-3; h >= 1e-12; h *= 1e-3) {
      const std::vector<double> aux = aux_values(cs, h);
      if (!all_finite(aux)) continue;
      const std::vector<double> y(m, h);
      if (!all_finite(evaluate_all(cs.main.G, h, y, aux))) continue;
      char buf[64];
      std::snprintf(buf, sizeof buf, "G finite at x = y = %g", h);
      rep.b = {Verdict::pass, buf};
      break;
    }
  }

  // (c) every monomial carries x
  rep.c = {Verdict::pass, "G(0, y) = 0"};
  for (std::size_t i = 0; i < m; ++i)
    if (x_valuation(*spec.equations[i], 0) == 0) {
      rep.c = {Verdict::fail, detail::gname(spec, i) + "(0, y) != 0"};
      break;
    }

  // (d) G_i(x, 0) != 0
  {
    const auto c0 = detail::collapse_env(spec, probe_order, true);
    rep.d = {Verdict::pass, ""};
    for (std::size_t i = 0; i < m && rep.d.verdict != Verdict::fail; ++i) {
      ExprPtr e = spec.equations[i];
      for (std::size_t j = 0; j < m; ++j) e = substitute_y(e, j, make_const(0));
      unsigned deg = 0;
      const auto p = detail::presence(e, c0, &deg);
      const std::string who = detail::gname(spec, i) + "(x, 0)";
      if (p == detail::Presence::zero) {
        rep.d = {Verdict::fail, who + " is identically 0"};
      } else if (p == detail::Presence::unknown) {
        rep.d = {Verdict::undecidable, who + " has no term up to x^" + std::to_string(probe_order)};
      } else if (rep.d.verdict == Verdict::pass) {
        if (!rep.d.witness.empty()) rep.d.witness += ", ";
        rep.d.witness += who + " has a term x^" + std::to_string(deg);
      }
    }
  }

  // (e) det(I - J_G(0, 0)) != 0, exactly
  {
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m));
    const auto jac = jacobian(spec);
    bool exact = true;
    for (std::size_t i = 0; i < m && exact; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        ExprPtr e = jac[i][j];
        for (std::size_t k = 0; k < m; ++k) e = substitute_y(e, k, make_const(0));
        e = map_leaves(e, [](const ExprPtr& leaf) -> ExprPtr {
          return leaf->kind == NodeKind::x || leaf->kind == NodeKind::aux ? make_const(0) : nullptr;
        });
        e = simplify(e);
        if (e->kind != NodeKind::constant) {
          exact = false;
          break;
        }
        a[i][j] = (i == j ? Rational(1) : Rational(0)) - e->value;
      }
    if (!exact) {
      rep.e = {Verdict::undecidable, "J_G(0, 0) has a non-rational entry"};
    } else {
      const Rational det = detail::determinant(a);
      rep.e = {det != 0 ? Verdict::pass : Verdict::fail, "det(I - J_G(0, 0)) = " + to_string(det)};
    }
  }

  // (f) irreducibility
  {
    const DependencyGraph g = dependency_graph(spec, probe_order);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (!g.edge[i][j]) rep.jacobian_zeros.emplace_back(i, j);
    std::vector<std::vector<bool>> maybe = g.edge;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) maybe[i][j] = maybe[i][j] || g.unknown[i][j];
    auto cut = [&](const std::vector<std::vector<bool>>& e) -> std::string {
      for (std::size_t v = 0; v < m; ++v) {
        auto u = detail::unreachable(e, v);
        if (!u.empty()) return detail::yname(spec, v) + " does not depend on " + detail::yname(spec, u.front());
      }
      return "";
    };
    const std::string definite = cut(g.edge);
    if (definite.empty()) {
      rep.f = {Verdict::pass, "dependency digraph is strongly connected"};
    } else if (cut(maybe).empty()) {
      rep.f = {Verdict::undecidable, definite + " within the probe order"};
    } else {
      rep.f = {Verdict::fail, cut(maybe)};
    }
  }

  // (g) nonlinearity
  {
    const auto c = detail::collapse_env(spec, probe_order, false);
    rep.g = {Verdict::fail, "every second y-partial is identically 0"};
    bool unknown = false;
    for (std::size_t i = 0; i < m && rep.g.verdict != Verdict::pass; ++i)
      for (std::size_t j = 0; j < m && rep.g.verdict != Verdict::pass; ++j) {
        const ExprPtr dj = simplify(derivative(spec.equations[i], Var::y(j)));
        for (std::size_t k = j; k < m; ++k) {
          const auto p = detail::presence(derivative(dj, Var::y(k)), c);
          if (p == detail::Presence::nonzero) {
            rep.g = {Verdict::pass, "d^2 " + detail::gname(spec, i) + " / d" + detail::yname(spec, j) + " d" +
                                        detail::yname(spec, k) + " != 0 (i=" + std::to_string(i + 1) +
                                        ", j=" + std::to_string(j + 1) + ", k=" + std::to_string(k + 1) + ")"};
            break;
          }
          if (p == detail::Presence::unknown) unknown = true;
        }
      }
    if (rep.g.verdict != Verdict::pass && unknown)
      rep.g = {Verdict::undecidable, "no nonzero second y-partial up to x^" + std::to_string(probe_order)};
  }
  return rep;
}

}  // namespace charpoint
