#pragma once

// Standard solution T(x) of y = G(x, y): exact coefficients by order-by-order
// extraction, and numeric values at points via the least fixed point.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "charpoint/expr.hpp"
#include "charpoint/perron.hpp"
#include "charpoint/series.hpp"
#include "charpoint/sysdef.hpp"

namespace charpoint {

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Coefficients = std::vector<Rational>;

namespace detail {

/// Demand-driven coefficient streams over an expression DAG. A y leaf only
/// exposes coefficients that the driver has already fixed; asking for the
/// current order means G(0, y) != 0 and the recursion cannot close.
class LazyEngine {
 public:
  LazyEngine(const std::vector<ExprPtr>& equations, const std::vector<Coefficients>& aux, unsigned order)
      : aux_(aux), order_(order), y_nodes_(equations.size(), -1), solution_(equations.size()) {
    for (const auto& e : equations) roots_.push_back(compile(e));
  }

  std::vector<Coefficients> run() {
    const std::size_t m = roots_.size();
    std::vector<Rational> fresh(m);
    for (unsigned n = 0; n <= order_; ++n) {
      current_ = n;
      for (std::size_t j = 0; j < m; ++j) fresh[j] = coeff(roots_[j], n);
      for (std::size_t j = 0; j < m; ++j) {
        if (fresh[j] < 0) throw SolveError("negative coefficient in the standard solution");
        if (n == 0 && fresh[j] != 0)
          throw SolveError("G(0, 0) != 0, so no solution passes through the origin");
        if (y_nodes_[j] >= 0) nodes_[y_nodes_[j]].c.push_back(fresh[j]);
        solution_[j].push_back(fresh[j]);
      }
    }
    return solution_;
  }

 private:
  enum class K { constant, x, y, aux, add, mul, exp, polylog_x, polylog };

  struct Node {
    K kind = K::constant;
    Rational value;
    std::size_t index = 0;
    int a = -1, b = -1;
    unsigned va = 0, vb = 0;
    int s = 0;
    unsigned deriv = 0;
    std::vector<int> powers;  // polylog of a general argument: f^1, f^2, ...
    Coefficients c;
  };

  const std::vector<Coefficients>& aux_;
  unsigned order_;
  unsigned current_ = 0;
  std::deque<Node> nodes_;
  std::vector<int> roots_;
  std::vector<int> y_nodes_;
  int x_node_ = -1;
  std::map<std::size_t, int> aux_nodes_;
  std::vector<Coefficients> solution_;
  std::map<const Expr*, int> memo_;
  std::map<int, unsigned> valuations_;

  int add_node(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
  }

  unsigned valuation(int id) const { return valuations_.at(id); }

  int with_valuation(Node n, unsigned v) {
    int id = add_node(std::move(n));
    valuations_[id] = v;
    return id;
  }

  int binary(K kind, int a, int b) {
    Node n;
    n.kind = kind;
    n.a = a;
    n.b = b;
    n.va = valuation(a);
    n.vb = valuation(b);
    unsigned v = kind == K::add ? std::min(n.va, n.vb)
                                : std::min<unsigned>(kInfiniteValuation, n.va + n.vb);
    return with_valuation(std::move(n), v);
  }

  int compile(const ExprPtr& e) {
    if (auto it = memo_.find(e.get()); it != memo_.end()) return it->second;
    int id = -1;
    switch (e->kind) {
      case NodeKind::constant: {
        Node n;
        n.kind = K::constant;
        n.value = e->value;
        id = with_valuation(std::move(n), e->value == 0 ? kInfiniteValuation : 0);
        break;
      }
      case NodeKind::x:
        if (x_node_ < 0) {
          Node n;
          n.kind = K::x;
          x_node_ = with_valuation(std::move(n), 1);
        }
        id = x_node_;
        break;
      case NodeKind::y:
        if (e->index >= y_nodes_.size()) throw SolveError("y index out of range");
        if (y_nodes_[e->index] < 0) {
          Node n;
          n.kind = K::y;
          n.index = e->index;
          n.c = solution_[e->index];
          y_nodes_[e->index] = with_valuation(std::move(n), 1);
        }
        id = y_nodes_[e->index];
        break;
      case NodeKind::aux: {
        if (e->index >= aux_.size()) throw SolveError("aux series '" + e->name + "' is not available");
        auto it = aux_nodes_.find(e->index);
        if (it == aux_nodes_.end()) {
          Node n;
          n.kind = K::aux;
          n.c = aux_[e->index];
          n.c.resize(order_ + 1);
          unsigned v = 0;
          while (v <= order_ && n.c[v] == 0) ++v;
          it = aux_nodes_.emplace(e->index, with_valuation(std::move(n), std::max(v, 1u))).first;
        }
        id = it->second;
        break;
      }
      case NodeKind::add:
      case NodeKind::mul: {
        const K k = e->kind == NodeKind::add ? K::add : K::mul;
        id = compile(e->kids[0]);
        for (std::size_t i = 1; i < e->kids.size(); ++i) id = binary(k, id, compile(e->kids[i]));
        break;
      }
      case NodeKind::pow: {
        const int base = compile(e->kids[0]);
        id = base;
        for (unsigned i = 1; i < e->exponent; ++i) id = binary(K::mul, id, base);
        break;
      }
      case NodeKind::exp: {
        Node n;
        n.kind = K::exp;
        n.a = compile(e->kids[0]);
        id = with_valuation(std::move(n), 0);
        break;
      }
      case NodeKind::polylog: {
        Node n;
        n.s = e->s;
        n.deriv = e->deriv;
        const int arg = compile(e->kids[0]);
        n.kind = nodes_[arg].kind == K::x ? K::polylog_x : K::polylog;
        n.a = arg;
        id = with_valuation(std::move(n), e->deriv > 0 ? 0 : valuation(arg));
        break;
      }
    }
    memo_[e.get()] = id;
    return id;
  }

  static Rational polylog_coeff(int s, unsigned deriv, unsigned n) {
    const unsigned k = n + deriv;
    if (k == 0) return 0;
    BigInt num = 1, den;
    for (unsigned j = n + 1; j <= k; ++j) num *= j;
    mpz_ui_pow_ui(den.get_mpz_t(), k, static_cast<unsigned long>(s));
    Rational r(num, den);
    r.canonicalize();
    return r;
  }

  const Rational& coeff(int id, unsigned n) {
    while (nodes_[id].c.size() <= n) {
      Rational v = next_coeff(id);
      nodes_[id].c.push_back(std::move(v));
    }
    return nodes_[id].c[n];
  }

  Rational next_coeff(int id) {
    const unsigned k = static_cast<unsigned>(nodes_[id].c.size());
    const K kind = nodes_[id].kind;
    switch (kind) {
      case K::constant: return k == 0 ? nodes_[id].value : Rational(0);
      case K::x: return k == 1 ? Rational(1) : Rational(0);
      case K::aux: return 0;  // preloaded through order N
      case K::y:
        throw SolveError("coefficient recursion does not close at order " + std::to_string(current_) +
                         ": G(0, y) must vanish identically");
      case K::add: {
        const int a = nodes_[id].a, b = nodes_[id].b;
        Rational sum = coeff(a, k);
        sum += coeff(b, k);
        return sum;
      }
      case K::mul: {
        const int a = nodes_[id].a, b = nodes_[id].b;
        const unsigned va = nodes_[id].va, vb = nodes_[id].vb;
        Rational sum = 0;
        if (va + vb > k) return sum;
        // fill both streams first: a and b may be the same node
        coeff(a, k - vb);
        coeff(b, k - va);
        const Coefficients& ca = nodes_[a].c;
        const Coefficients& cb = nodes_[b].c;
        for (unsigned i = va; i + vb <= k; ++i) {
          if (ca[i] == 0 || cb[k - i] == 0) continue;
          sum += ca[i] * cb[k - i];
        }
        return sum;
      }
      case K::exp: {
        const int f = nodes_[id].a;
        if (k == 0) {
          if (coeff(f, 0) != 0) throw SolveError("exp argument must vanish at x = 0");
          return 1;
        }
        coeff(f, k);
        const Coefficients& cf = nodes_[f].c;
        const Coefficients& ce = nodes_[id].c;
        Rational sum = 0;
        for (unsigned i = 1; i <= k; ++i) {
          if (cf[i] == 0) continue;
          sum += Rational(i) * cf[i] * ce[k - i];
        }
        return sum / k;
      }
      case K::polylog_x: return polylog_coeff(nodes_[id].s, nodes_[id].deriv, k);
      case K::polylog: {
        const int f = nodes_[id].a;
        const int s = nodes_[id].s;
        const unsigned deriv = nodes_[id].deriv;
        if (k == 0) {
          if (coeff(f, 0) != 0) throw SolveError("polylog argument must vanish at x = 0");
          return polylog_coeff(s, deriv, 0);
        }
        Rational sum = 0;
        for (unsigned j = 1; j <= k; ++j) {
          while (nodes_[id].powers.size() < j) {
            const int prev = nodes_[id].powers.empty() ? -1 : nodes_[id].powers.back();
            const int p = prev < 0 ? f : binary(K::mul, prev, f);
            nodes_[id].powers.push_back(p);
          }
          const int pj = nodes_[id].powers[j - 1];
          const Rational& t = coeff(pj, k);
          if (t != 0) sum += polylog_coeff(s, deriv, j) * t;
        }
        return sum;
      }
    }
    return 0;
  }
};

inline unsigned support_stride_of(const Coefficients& c) {
  unsigned g = 0;
  long prev = -1;
  for (std::size_t n = 0; n < c.size(); ++n) {
    if (c[n] == 0) continue;
    if (prev >= 0) g = std::gcd(g, static_cast<unsigned>(n - prev));
    prev = static_cast<long>(n);
  }
  return g == 0 ? 1 : g;
}

}  // namespace detail

// ---------------------------------------------------------------- compiled form

/// Symbolic derivatives needed for pointwise work, computed once per system.
struct CompiledEquations {
  std::vector<ExprPtr> G;
  std::vector<std::vector<ExprPtr>> J;     // dG_i/dy_j
  std::vector<ExprPtr> Gx;                 // partial dG_i/dx
  std::vector<std::vector<ExprPtr>> Gaux;  // dG_i/daux_k
  std::vector<ExprPtr> Jyy;                // d^2G/dy^2, 1-equation systems only

  CompiledEquations() = default;
  CompiledEquations(const std::vector<ExprPtr>& eqs, std::size_t naux) : G(eqs) {
    const std::size_t m = eqs.size();
    J.assign(m, std::vector<ExprPtr>(m));
    Gaux.assign(m, std::vector<ExprPtr>(naux));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) J[i][j] = simplify(derivative(eqs[i], Var::y(j)));
      Gx.push_back(simplify(derivative(eqs[i], Var::x())));
      for (std::size_t k = 0; k < naux; ++k) Gaux[i][k] = simplify(derivative(eqs[i], Var::aux(k)));
    }
    if (m == 1) Jyy.push_back(simplify(derivative(J[0][0], Var::y(0))));
  }

  std::size_t arity() const { return G.size(); }
};

struct CompiledSystem {
  SystemSpec spec;
  CompiledEquations main;
  std::vector<CompiledEquations> aux;  // aux[k] is the 1-equation system of aux k

  explicit CompiledSystem(SystemSpec s) : spec(std::move(s)), main(spec.equations, spec.aux.size()) {
    for (std::size_t k = 0; k < spec.aux.size(); ++k) aux.emplace_back(std::vector<ExprPtr>{spec.aux[k].equation}, k);
  }
};

// ---------------------------------------------------------------- standard solution

struct StandardSolution {
  std::vector<MultiSeries> series;        // T_i(x), univariate, order N
  std::vector<Coefficients> coefficients;  // dense copies of the same
  std::vector<Coefficients> aux_coefficients;
  std::vector<unsigned> support_stride;
  unsigned order = 0;
  std::shared_ptr<const CompiledSystem> system;

  std::size_t arity() const { return coefficients.size(); }
};

inline std::vector<Coefficients> solve_aux_coefficients(const SystemSpec& spec, unsigned order) {
  std::vector<Coefficients> aux;
  for (const auto& def : spec.aux) {
    try {
      aux.push_back(detail::LazyEngine({def.equation}, aux, order).run()[0]);
    } catch (const SolveError& e) {
      throw SolveError("in let " + def.name + ": " + e.what());
    }
  }
  return aux;
}

/// Exact coefficients of T(x) through x^N.
inline StandardSolution solve_coefficients(const SystemSpec& spec, unsigned order) {
  if (order < 1) throw SolveError("solve_coefficients: order must be at least 1");
  if (spec.arity() == 0) throw SolveError("solve_coefficients: empty system");
  StandardSolution sol;
  sol.order = order;
  sol.aux_coefficients = solve_aux_coefficients(spec, order);
  sol.coefficients = detail::LazyEngine(spec.equations, sol.aux_coefficients, order).run();
  for (const auto& c : sol.coefficients) {
    sol.series.push_back(MultiSeries::from_coefficients(c, order));
    sol.support_stride.push_back(detail::support_stride_of(c));
  }
  sol.system = std::make_shared<const CompiledSystem>(spec);
  return sol;
}

/// Univariate series environment with each y_j and aux bound to given series.
inline SeriesEnv univariate_env(const std::vector<MultiSeries>& y, const std::vector<Coefficients>& aux,
                                unsigned order) {
  SeriesEnv env{MultiSeries::variable(1, order, 0), y, {}};
  for (const auto& a : aux) env.aux.push_back(MultiSeries::from_coefficients(a, order));
  return env;
}

/// max over components and orders of |[x^n] G_i(x, T(x)) - t_i(n)|, exactly.
inline Rational self_consistency_defect(const StandardSolution& sol) {
  const SeriesEnv env = univariate_env(sol.series, sol.aux_coefficients, sol.order);
  Rational worst = 0;
  for (std::size_t i = 0; i < sol.arity(); ++i) {
    const Coefficients g = to_series(sol.system->spec.equations[i], env).dense();
    for (unsigned n = 0; n <= sol.order; ++n) {
      Rational d = g[n] - sol.coefficients[i][n];
      if (d < 0) d = -d;
      if (d > worst) worst = d;
    }
  }
  return worst;
}

// ---------------------------------------------------------------- pointwise evaluation

inline bool all_finite(const std::vector<double>& v) {
  for (double d : v)
    if (!std::isfinite(d)) return false;
  return true;
}

inline std::vector<double> evaluate_all(const std::vector<ExprPtr>& es, double x, std::span<const double> y,
                                        std::span<const double> aux) {
  std::vector<double> out;
  out.reserve(es.size());
  for (const auto& e : es) out.push_back(evaluate(e, x, y, aux));
  return out;
}

inline Matrix evaluate_matrix(const std::vector<std::vector<ExprPtr>>& es, double x, std::span<const double> y,
                              std::span<const double> aux) {
  const auto rows = static_cast<Eigen::Index>(es.size());
  const auto cols = static_cast<Eigen::Index>(es.empty() ? 0 : es[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = evaluate(es[i][j], x, y, aux);
  return m;
}

/// Lambda(M) with the conventions Lambda(0) = 0 and +inf for non-finite M.
inline double perron_root(const Matrix& m) {
  if (!m.allFinite()) return std::numeric_limits<double>::infinity();
  if (m.isZero(0.0)) return 0.0;
  return lambda_max(m).lambda;
}

/// Residual accepted once Lambda(J) reaches 1. Just past a fold the residual
/// bottoms out near (x - rho) * dG/dx, so this bounds how far beyond rho a
/// point can still pass as finite.
inline constexpr double kFoldResidual = 1e-13;

struct FixedPoint {
  bool finite = false;
  std::vector<double> y;
  double lambda = 0.0;  // Lambda(J_G(x, y)) at the returned point
  int iterations = 0;
};

/// Least nonnegative solution of y = G(x, y) by Newton's method from y = 0.
///
/// For nonnegative G the Newton iterates increase monotonically towards the
/// least fixed point while Lambda(J) < 1. Reaching Lambda(J) >= 1 with a
/// non-negligible residual, a non-finite value, or the iteration cap means the
/// least fixed point is +inf.
inline FixedPoint least_fixed_point(const CompiledEquations& eq, double x, std::span<const double> aux,
                                    int max_iterations = 400) {
  const std::size_t m = eq.arity();
  FixedPoint fp;
  fp.y.assign(m, 0.0);
  auto norm = [](const std::vector<double>& v) {
    double n = 0.0;
    for (double d : v) n = std::max(n, std::fabs(d));
    return n;
  };
  int polish = 0;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    fp.iterations = it;
    const std::vector<double> g = evaluate_all(eq.G, x, fp.y, aux);
    if (!all_finite(g)) return fp;
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = g[i] - fp.y[i];
    const double scale = std::max(1.0, norm(fp.y));
    const Matrix j = evaluate_matrix(eq.J, x, fp.y, aux);
    if (!j.allFinite()) return fp;
    fp.lambda = perron_root(j);
    if (norm(r) <= 1e-15 * scale) {
      fp.finite = true;
      // near a fold the residual is quadratic in the error; keep halving it
      // while the Newton steps still shrink
      if (fp.lambda < 0.999 || polish++ > 64) return fp;
    } else if (fp.finite) {
      return fp;
    }
    if (fp.lambda >= 1.0) {
      if (fp.finite) return fp;
      fp.finite = norm(r) <= kFoldResidual * scale;
      return fp;
    }
    Vector rv = Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(m));
    Vector delta = (Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) - j)
                       .partialPivLu()
                       .solve(rv);
    double step = 0.0;
    for (std::size_t i = 0; i < m; ++i) step = std::max(step, std::max(delta[static_cast<Eigen::Index>(i)], 0.0));
    if (fp.finite && !(step < 0.75 * last_step)) return fp;
    last_step = step;
    for (std::size_t i = 0; i < m; ++i) fp.y[i] += std::max(delta[static_cast<Eigen::Index>(i)], 0.0);
    if (!all_finite(fp.y) || norm(fp.y) > 1e300) return fp;
    if (step <= 1e-16 * std::max(1.0, norm(fp.y))) {
      const std::vector<double> g2 = evaluate_all(eq.G, x, fp.y, aux);
      double res = 0.0;
      for (std::size_t i = 0; i < m; ++i) res = std::max(res, std::fabs(g2[i] - fp.y[i]));
      fp.finite = all_finite(g2) && res <= kFoldResidual * std::max(1.0, norm(fp.y));
      fp.lambda = perron_root(evaluate_matrix(eq.J, x, fp.y, aux));
      return fp;
    }
  }
  const std::vector<double> g = evaluate_all(eq.G, x, fp.y, aux);
  double res = 0.0;
  for (std::size_t i = 0; i < m; ++i) res = std::max(res, std::fabs(g[i] - fp.y[i]));
  fp.finite = all_finite(g) && res <= kFoldResidual * std::max(1.0, norm(fp.y));
  return fp;
}

/// At a fold of a 1-equation system (dg/da = 1) the fixed point is known only
/// to about sqrt(eps). The fold condition itself is well conditioned, so solve
/// dg/da = 1 for a and keep that value when it also satisfies a = g(x, a).
inline double refine_at_fold(const CompiledEquations& eq, double x, double a, std::span<const double> prior) {
  if (eq.Jyy.empty()) return a;
  double f = a;
  for (int it = 0; it < 50; ++it) {
    const double v[1] = {f};
    const double phi = evaluate(eq.J[0][0], x, v, prior) - 1.0;
    const double dphi = evaluate(eq.Jyy[0], x, v, prior);
    if (!(dphi > 0.0) || !std::isfinite(phi)) return a;
    const double step = phi / dphi;
    f -= step;
    if (!(f > 0.0)) return a;
    if (std::fabs(step) <= 1e-16 * f) break;
  }
  const double v[1] = {f};
  const double res = evaluate(eq.G[0], x, v, prior) - f;
  return std::fabs(res) <= 1e-14 * std::max(1.0, f) ? f : a;
}

/// Values of every aux series at x (+inf beyond their radius).
inline std::vector<double> aux_values(const CompiledSystem& cs, double x) {
  std::vector<double> a(cs.aux.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < cs.aux.size(); ++k) {
    bool prior_finite = true;
    for (std::size_t l = 0; l < k; ++l) prior_finite = prior_finite && std::isfinite(a[l]);
    if (!prior_finite) break;
    const std::span<const double> prior(a.data(), k);
    FixedPoint fp = least_fixed_point(cs.aux[k], x, prior);
    if (!fp.finite) break;
    a[k] = fp.lambda > 1.0 - 1e-6 ? refine_at_fold(cs.aux[k], x, fp.y[0], prior) : fp.y[0];
  }
  return a;
}

/// d aux_k / dx by implicit differentiation of a_k = g_k(x, a_k, a_<k).
inline std::vector<double> aux_derivatives(const CompiledSystem& cs, double x, const std::vector<double>& a) {
  std::vector<double> d(a.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!std::isfinite(a[k])) break;
    const auto& eq = cs.aux[k];
    std::span<const double> prior(a.data(), k);
    const double own[1] = {a[k]};
    double num = evaluate(eq.Gx[0], x, own, prior);
    for (std::size_t l = 0; l < k; ++l) {
      const double p = evaluate(eq.Gaux[0][l], x, own, prior);
      if (p != 0.0) num += p * d[l];
    }
    const double den = 1.0 - evaluate(eq.J[0][0], x, own, prior);
    d[k] = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  }
  return d;
}

struct PointEval {
  double x = 0.0;
  std::vector<double> T_values;       // least fixed point (+inf beyond rho)
  std::vector<double> T_series;       // truncated series sums
  std::vector<Convergence> T_diagnostic;
  Matrix J_values;                    // J_G(x, T(x))
  std::vector<double> Gx_values;      // total dG_i/dx at (x, T(x)), aux included
  std::vector<double> aux_values;
  double lambda = 0.0;
  bool finite = false;
};

inline PointEval eval_point(const CompiledSystem& cs, double x, const StandardSolution* sol = nullptr) {
  if (!(x >= 0.0)) throw SolveError("eval_point: x must be nonnegative");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t m = cs.main.arity();
  PointEval pe;
  pe.x = x;
  if (sol) {
    const double pt[1] = {x};
    for (const auto& s : sol->series) {
      EvalResult r = eval(s, pt);
      pe.T_series.push_back(r.sum);
      pe.T_diagnostic.push_back(r.diagnostic);
    }
  }
  pe.aux_values = aux_values(cs, x);
  pe.T_values.assign(m, inf);
  pe.J_values = Matrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m), inf);
  pe.Gx_values.assign(m, inf);
  pe.lambda = inf;
  if (!all_finite(pe.aux_values)) return pe;
  FixedPoint fp = least_fixed_point(cs.main, x, pe.aux_values);
  if (!fp.finite) return pe;
  pe.finite = true;
  pe.T_values = fp.y;
  pe.J_values = evaluate_matrix(cs.main.J, x, fp.y, pe.aux_values);
  pe.lambda = perron_root(pe.J_values);
  const std::vector<double> da = aux_derivatives(cs, x, pe.aux_values);
  for (std::size_t i = 0; i < m; ++i) {
    double g = evaluate(cs.main.Gx[i], x, fp.y, pe.aux_values);
    for (std::size_t k = 0; k < da.size(); ++k) {
      const double p = evaluate(cs.main.Gaux[i][k], x, fp.y, pe.aux_values);
      if (p != 0.0) g += p * da[k];
    }
    pe.Gx_values[i] = g;
  }
  return pe;
}

inline PointEval eval_point(const StandardSolution& sol, double x) { return eval_point(*sol.system, x, &sol); }

/// Lambda(J_G(x, T(x))).
inline double lambda_along_solution(const CompiledSystem& cs, double x) {
  PointEval pe = eval_point(cs, x);
  if (!pe.finite) throw SolveError("lambda_along_solution: T diverges at x = " + std::to_string(x));
  return pe.lambda;
}

inline double lambda_along_solution(const StandardSolution& sol, double x) {
  return lambda_along_solution(*sol.system, x);
}

/// True when T(x) (and every aux series) is finite at x.
inline bool solution_finite_at(const CompiledSystem& cs, double x) {
  const std::vector<double> a = aux_values(cs, x);
  if (!all_finite(a)) return false;
  return least_fixed_point(cs.main, x, a).finite;
}

/// Fold point of aux series k near (x0, a0): solves a_l = g_l(x, a) for l <= k
/// together with dg_k/da_k = 1 by Newton in (x, a_0..a_k). Unlike bisection
/// on finiteness this is well conditioned.
inline std::optional<std::pair<double, std::vector<double>>> aux_fold_point(const CompiledSystem& cs, std::size_t k,
                                                                           double x0, std::vector<double> a0) {
  const int n = static_cast<int>(k) + 2;
  auto F = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd f(n);
    const double x = z[0];
    for (std::size_t l = 0; l <= k; ++l) {
      const double v[1] = {z[static_cast<Eigen::Index>(l) + 1]};
      const std::span<const double> prior(z.data() + 1, l);
      f[static_cast<Eigen::Index>(l)] = evaluate(cs.aux[l].G[0], x, v, prior) - v[0];
    }
    const double v[1] = {z[static_cast<Eigen::Index>(k) + 1]};
    f[n - 1] = evaluate(cs.aux[k].J[0][0], x, v, std::span<const double>(z.data() + 1, k)) - 1.0;
    return f;
  };
  Eigen::VectorXd z(n);
  z[0] = x0;
  for (std::size_t l = 0; l <= k; ++l) z[static_cast<Eigen::Index>(l) + 1] = a0[l];
  for (int it = 0; it < 60; ++it) {
    const Eigen::VectorXd f = F(z);
    if (!f.allFinite()) return std::nullopt;
    Eigen::MatrixXd D(n, n);
    for (int c = 0; c < n; ++c) {
      const double h = std::max(1e-7, 1e-7 * std::fabs(z[c]));
      Eigen::VectorXd zp = z, zm = z;
      zp[c] += h;
      zm[c] -= h;
      D.col(c) = (F(zp) - F(zm)) / (2.0 * h);
    }
    const Eigen::VectorXd step = D.fullPivLu().solve(f);
    if (!step.allFinite()) return std::nullopt;
    z -= step;
    if ((z.array() <= 0.0).any()) return std::nullopt;
    if (step.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, z.cwiseAbs().maxCoeff())) break;
  }
  if (F(z).cwiseAbs().maxCoeff() > 1e-13) return std::nullopt;
  return std::make_pair(z[0], std::vector<double>(z.data() + 1, z.data() + n));
}

/// sup { x : T(x) finite }, by bracketing from `seed` and bisection.
inline double domain_radius(const CompiledSystem& cs, double seed = 0.25, double rel_tol = 1e-14) {
  if (!(seed > 0.0)) seed = 0.25;
  double lo = 0.0, hi = seed;
  if (solution_finite_at(cs, seed)) {
    lo = seed;
    hi = 2.0 * seed;
    int guard = 0;
    while (solution_finite_at(cs, hi)) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 60) return std::numeric_limits<double>::infinity();
    }
  } else {
    int guard = 0;
    lo = seed / 2.0;
    while (!solution_finite_at(cs, lo)) {
      hi = lo;
      lo /= 2.0;
      if (++guard > 200) return 0.0;
    }
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (solution_finite_at(cs, mid)) lo = mid;
    else hi = mid;
  }
  // snap to an aux fold when that is what stops the solution
  const std::vector<double> a = aux_values(cs, lo);
  for (std::size_t k = 0; k < cs.aux.size() && std::isfinite(a[k]); ++k) {
    const double v[1] = {a[k]};
    const double slope = evaluate(cs.aux[k].J[0][0], lo, v, std::span<const double>(a.data(), k));
    if (slope < 0.99) continue;
    const auto fold = aux_fold_point(cs, k, lo, a);
    if (fold && std::fabs(fold->first - lo) <= 1e-9 * lo) return fold->first;
  }
  return lo;
}

}  // namespace charpoint
