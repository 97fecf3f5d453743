#pragma once

// Self-substitution: one occurrence of y_j in G_i is replaced by
// alpha*G_j + (1-alpha)*y_j. Positive solutions, characteristic points and
// the standard solution are unchanged; the Jacobian gains entries.
//
// Occurrences are counted left to right in preorder. A power b^k counts as k
// adjacent copies of b, so the two y2's of y2^2 are occurrences 0 and 1.

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "charpoint/charpt.hpp"
#include "charpoint/expr.hpp"
#include "charpoint/perron.hpp"
#include "charpoint/sysdef.hpp"
#include "charpoint/validate.hpp"

namespace charpoint {

class TransformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SubstitutionStep {
  std::size_t i = 0, j = 0;  // 0-based equation and variable
  std::size_t occurrence = 0;  // 0-based; 1-based in step text
  Rational alpha = Rational(1, 2);
};

inline std::string to_string(const SubstitutionStep& s) {
  return "i=" + std::to_string(s.i + 1) + ",j=" + std::to_string(s.j + 1) + ",occ=" + std::to_string(s.occurrence + 1) +
         ",alpha=" + to_string(s.alpha);
}

/// Parses "i=1,j=2,occ=1,alpha=1/2" (i, j and occ 1-based). Missing keys
/// default to i=j=occ=1, alpha=1/2.
inline SubstitutionStep parse_step(std::string_view text) {
  SubstitutionStep s;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw TransformError("step item '" + std::string(item) + "' has no '='");
    const std::string key(item.substr(0, eq));
    const std::string val(item.substr(eq + 1));
    auto index = [&](const char* what) {
      std::size_t used = 0;
      long v = -1;
      try {
        v = std::stol(val, &used);
      } catch (const std::exception&) {
      }
      if (used != val.size() || v < 0) throw TransformError(std::string("bad ") + what + " '" + val + "'");
      return static_cast<std::size_t>(v);
    };
    if (key == "i" || key == "j" || key == "occ") {
      const std::size_t v = index(key.c_str());
      if (v == 0) throw TransformError(key + " is 1-based");
      (key == "i" ? s.i : key == "j" ? s.j : s.occurrence) = v - 1;
    } else if (key == "alpha") {
      try {
        s.alpha = parse_rational(val);
      } catch (const std::exception&) {
        throw TransformError("bad alpha '" + val + "'");
      }
    } else {
      throw TransformError("unknown step key '" + key + "'");
    }
  }
  return s;
}

namespace detail {

inline std::size_t count_occurrences(const ExprPtr& e, std::size_t j) {
  if (e->kind == NodeKind::y) return e->index == j ? 1 : 0;
  if (e->kind == NodeKind::pow) return e->exponent * count_occurrences(e->kids[0], j);
  std::size_t n = 0;
  for (const auto& k : e->kids) n += count_occurrences(k, j);
  return n;
}

// Replaces occurrence number `t` (counting down) of y_j.
inline ExprPtr replace_occurrence(const ExprPtr& e, std::size_t j, std::size_t& t, const ExprPtr& r) {
  if (e->kind == NodeKind::y) {
    if (e->index != j) return e;
    if (t == 0) {
      t = static_cast<std::size_t>(-1);
      return r;
    }
    --t;
    return e;
  }
  if (e->kind == NodeKind::pow) {
    const std::size_t per = count_occurrences(e->kids[0], j);
    if (per == 0 || t >= per * e->exponent) {
      if (per) t -= per * e->exponent;
      return e;
    }
    const unsigned before = static_cast<unsigned>(t / per);
    const unsigned after = e->exponent - 1 - before;
    t %= per;
    std::vector<ExprPtr> f;
    if (before) f.push_back(before == 1 ? e->kids[0] : make_pow(e->kids[0], before));
    f.push_back(replace_occurrence(e->kids[0], j, t, r));
    if (after) f.push_back(after == 1 ? e->kids[0] : make_pow(e->kids[0], after));
    return make_mul(std::move(f));
  }
  if (e->kids.empty()) return e;
  auto copy = std::make_shared<Expr>(*e);
  for (auto& k : copy->kids) k = replace_occurrence(k, j, t, r);
  return copy;
}

}  // namespace detail

/// Rewrites G_i only; every other equation and the aux table are kept as is.
inline SystemSpec minimal_substitute(const SystemSpec& spec, const SubstitutionStep& step, unsigned probe_order = 24) {
  const std::size_t m = spec.arity();
  if (step.i >= m || step.j >= m)
    throw TransformError("step " + to_string(step) + " is out of range for " + std::to_string(m) + " equations");
  if (step.alpha < 0 || step.alpha > 1) throw TransformError("alpha must lie in [0, 1], got " + to_string(step.alpha));
  const ExprPtr& g = spec.equations[step.i];
  const std::size_t n = detail::count_occurrences(g, step.j);
  if (step.occurrence >= n)
    throw TransformError(detail::gname(spec, step.i) + " has " + std::to_string(n) + " occurrence(s) of " +
                         detail::yname(spec, step.j) + "; occ=" + std::to_string(step.occurrence + 1) + " is invalid");
  const auto c = detail::collapse_env(spec, probe_order, false);
  if (detail::presence(derivative(g, Var::y(step.j)), c) != detail::Presence::nonzero)
    throw TransformError("d" + detail::gname(spec, step.i) + "/d" + detail::yname(spec, step.j) +
                         " has no term up to order " + std::to_string(probe_order));

  std::vector<ExprPtr> parts;
  if (step.alpha != 0) parts.push_back(make_mul({make_const(step.alpha), spec.equations[step.j]}));
  if (step.alpha != 1) parts.push_back(make_mul({make_const(Rational(1) - step.alpha), make_y(step.j)}));
  const ExprPtr r = simplify(parts.size() == 1 ? parts[0] : make_add(std::move(parts)));

  SystemSpec out = spec;
  std::size_t t = step.occurrence;
  out.equations[step.i] = simplify(detail::replace_occurrence(g, step.j, t, r));
  return out;
}

// ---------------------------------------------------------------- saturation

struct SaturationResult {
  SystemSpec spec;
  std::vector<SubstitutionStep> steps;
  std::vector<std::pair<std::size_t, std::size_t>> zeros;  // still zero; empty when saturated
  bool saturated() const { return zeros.empty(); }
};

class SaturationError : public TransformError {
 public:
  SaturationError(const std::string& what, SaturationResult partial)
      : TransformError(what), partial(std::move(partial)) {}
  SaturationResult partial;
};

inline std::vector<std::pair<std::size_t, std::size_t>> jacobian_zero_entries(const SystemSpec& spec,
                                                                              unsigned probe_order) {
  const DependencyGraph g = dependency_graph(spec, probe_order);
  std::vector<std::pair<std::size_t, std::size_t>> z;
  for (std::size_t i = 0; i < spec.arity(); ++i)
    for (std::size_t j = 0; j < spec.arity(); ++j)
      if (!g.edge[i][j]) z.emplace_back(i, j);
  return z;
}

namespace detail {

// First hop of a shortest path i -> ... -> j with at least one edge.
inline std::optional<std::size_t> first_hop(const std::vector<std::vector<bool>>& edge, std::size_t i, std::size_t j) {
  const std::size_t m = edge.size();
  std::vector<std::optional<std::size_t>> via(m);  // first hop used to reach each vertex
  std::deque<std::size_t> queue;
  for (std::size_t w = 0; w < m; ++w)
    if (edge[i][w]) {
      if (w == j) return w;
      via[w] = w;
      queue.push_back(w);
    }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w = 0; w < m; ++w) {
      if (!edge[v][w]) continue;
      if (w == j) return via[v];
      if (!via[w]) {
        via[w] = via[v];
        queue.push_back(w);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Substitutes along dependency paths (alpha = 1/2, first occurrence) until
/// every dG_i/dy_j is nonzero at the probe order.
inline SaturationResult saturate_jacobian(const SystemSpec& spec, unsigned probe_order = 24, std::size_t cap = 100) {
  SaturationResult res{spec, {}, jacobian_zero_entries(spec, probe_order)};
  while (!res.zeros.empty()) {
    if (res.steps.size() >= cap)
      throw SaturationError("saturation cap of " + std::to_string(cap) + " steps reached with " +
                                std::to_string(res.zeros.size()) + " zero Jacobian entries left",
                            res);
    const auto g = dependency_graph(res.spec, probe_order);
    std::optional<SubstitutionStep> step;
    for (const auto& [i, j] : res.zeros) {
      if (auto hop = detail::first_hop(g.edge, i, j)) {
        step = SubstitutionStep{i, *hop, 0, Rational(1, 2)};
        break;
      }
    }
    if (!step)
      throw SaturationError("no dependency path reaches the remaining zero entries; the system is reducible", res);
    res.spec = minimal_substitute(res.spec, *step, probe_order);
    res.steps.push_back(*step);
    res.zeros = jacobian_zero_entries(res.spec, probe_order);
  }
  return res;
}

// ---------------------------------------------------------------- invariance

struct InvarianceEntry {
  double a = 0.0;
  std::vector<double> b;
  double residual = 0.0;  // sup norm of the transformed characteristic system
  double lambda = 0.0, lambda_transformed = 0.0;
  bool eigen = false, eigen_transformed = false;
  bool pass = false;
};

struct InvarianceReport {
  std::vector<InvarianceEntry> entries;
  bool pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
};

inline constexpr double kInvarianceTolerance = 1e-6;

/// At each characteristic point of `spec`: the transformed characteristic
/// residual stays below 1e-6 and the Lambda = 1 flag agrees.
inline InvarianceReport verify_invariance(const SystemSpec& spec, const SystemSpec& transformed,
                                          const std::vector<CharPoint>& points, double eigentol = 1e-6) {
  if (spec.arity() != transformed.arity()) throw TransformError("systems differ in arity");
  const CompiledSystem a(spec), t(transformed);
  InvarianceReport rep;
  for (const auto& p : points) {
    InvarianceEntry e;
    e.a = p.a;
    e.b = p.b;
    const auto r = characteristic_residual(t, p.a, p.b);
    for (double v : r) e.residual = std::max(e.residual, std::fabs(v));
    if (std::isnan(e.residual)) e.residual = std::numeric_limits<double>::infinity();
    e.lambda = lambda_at(a, p.a, p.b);
    e.lambda_transformed = lambda_at(t, p.a, p.b);
    e.eigen = std::fabs(e.lambda - 1.0) <= eigentol;
    e.eigen_transformed = std::fabs(e.lambda_transformed - 1.0) <= eigentol;
    e.pass = e.residual < kInvarianceTolerance && e.eigen == e.eigen_transformed;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace charpoint
