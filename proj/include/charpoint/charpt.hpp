#pragma once

// Characteristic points: positive solutions of y = G(x, y), det(I - J_G) = 0,
// their Lambda classification, and the extreme point (rho, tau).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "charpoint/perron.hpp"
#include "charpoint/solve.hpp"
#include "charpoint/sysdef.hpp"

namespace charpoint {

class CharptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two or more eigenpoints: impossible for a well-conditioned system, so the
/// tolerance or the system is wrong.
class MultipleEigenpointsError : public CharptError {
 public:
  using CharptError::CharptError;
};

enum class Location { interior, boundary, unknown };

inline const char* to_string(Location l) {
  switch (l) {
    case Location::interior: return "interior";
    case Location::boundary: return "boundary";
    case Location::unknown: return "unknown";
  }
  return "unknown";
}

struct CharPoint {
  double a = 0.0;
  std::vector<double> b;
  std::vector<double> aux;  // aux series values at a
  double residual = 0.0;    // max |F| over the characteristic and aux equations
  double lambda = 0.0;      // Lambda(J_G(a, b))
  Location location = Location::unknown;
  bool is_eigenpoint = false;
};

struct SearchBox {
  double x_max = 0.0;
  std::vector<double> y_max;
};

struct SearchOptions {
  int n_starts = 64;
  std::uint64_t seed = 0;
  double eigentol = 1e-6;
};

inline constexpr double kCharTolerance = 1e-9;  // accepted residual
inline constexpr double kDedupDistance = 1e-7;

// ---------------------------------------------------------------- residuals

namespace detail {

inline double det_i_minus(const Matrix& j) {
  if (!j.allFinite()) return std::numeric_limits<double>::infinity();
  const Matrix m = Matrix::Identity(j.rows(), j.cols()) - j;
  const double d = m.partialPivLu().determinant();
  return std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
}

inline double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

}  // namespace detail

/// [G_i(x, y) - y_i]_i ++ [det(I - J_G(x, y))], aux series evaluated at x.
/// Entries that diverge come back as +inf.
inline std::vector<double> characteristic_residual(const CompiledSystem& cs, double x, std::span<const double> y) {
  const std::size_t m = cs.main.arity();
  if (y.size() != m) throw CharptError("characteristic_residual: expected " + std::to_string(m) + " y values");
  std::vector<double> r(m + 1, std::numeric_limits<double>::infinity());
  const std::vector<double> a = aux_values(cs, x);
  if (!all_finite(a)) return r;
  for (std::size_t i = 0; i < m; ++i) r[i] = detail::finite_or_inf(evaluate(cs.main.G[i], x, y, a) - y[i]);
  r[m] = detail::det_i_minus(evaluate_matrix(cs.main.J, x, y, a));
  return r;
}

inline std::vector<double> characteristic_residual(const SystemSpec& spec, double x, std::span<const double> y) {
  return characteristic_residual(CompiledSystem(spec), x, y);
}

/// Lambda(J_G(x, y)) with aux series evaluated at x.
inline double lambda_at(const CompiledSystem& cs, double x, std::span<const double> y) {
  const std::vector<double> a = aux_values(cs, x);
  if (!all_finite(a)) return std::numeric_limits<double>::infinity();
  return perron_root(evaluate_matrix(cs.main.J, x, y, a));
}

// ---------------------------------------------------------------- Newton

namespace detail {

// Unknowns z = (x, y_1..y_m, a_1..a_K). The aux values are carried as
// unknowns with their own equations a_k = g_k(x, a), so the solver can sit
// exactly on an aux fold where a(x) itself has a square-root singularity.
struct Augmented {
  const CompiledSystem& cs;
  std::size_t m, K;

  explicit Augmented(const CompiledSystem& c) : cs(c), m(c.main.arity()), K(c.aux.size()) {}

  int dim() const { return static_cast<int>(1 + m + K); }

  Eigen::VectorXd F(const Eigen::VectorXd& z) const {
    Eigen::VectorXd f(dim());
    const double x = z[0];
    const std::span<const double> y(z.data() + 1, m);
    const std::span<const double> a(z.data() + 1 + m, K);
    for (std::size_t i = 0; i < m; ++i) f[static_cast<Eigen::Index>(i)] = evaluate(cs.main.G[i], x, y, a) - y[i];
    f[static_cast<Eigen::Index>(m)] = det_i_minus(evaluate_matrix(cs.main.J, x, y, a));
    for (std::size_t k = 0; k < K; ++k) {
      const std::span<const double> ak(z.data() + 1 + m + k, 1);
      f[static_cast<Eigen::Index>(1 + m + k)] = evaluate(cs.aux[k].G[0], x, ak, a.first(k)) - ak[0];
    }
    for (Eigen::Index i = 0; i < f.size(); ++i)
      if (!std::isfinite(f[i])) f[i] = std::numeric_limits<double>::infinity();
    return f;
  }

  // central differences, one-sided where one side leaves the domain
  std::optional<Eigen::MatrixXd> jacobian(const Eigen::VectorXd& z, const Eigen::VectorXd& fz) const {
    const int n = dim();
    Eigen::MatrixXd D(n, n);
    for (int c = 0; c < n; ++c) {
      const double h = std::max(1e-6, 1e-6 * std::fabs(z[c]));
      Eigen::VectorXd zp = z, zm = z;
      zp[c] += h;
      zm[c] -= h;
      const Eigen::VectorXd fp = F(zp);
      const Eigen::VectorXd fm = zm[c] > 0.0 ? F(zm) : Eigen::VectorXd::Constant(n, INFINITY);
      if (fp.allFinite() && fm.allFinite()) D.col(c) = (fp - fm) / (2.0 * h);
      else if (fp.allFinite()) D.col(c) = (fp - fz) / h;
      else if (fm.allFinite()) D.col(c) = (fz - fm) / h;
      else return std::nullopt;
    }
    return D;
  }
};

inline double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// ---- quad-precision polishing

using quad = __float128;
using QuadVec = std::vector<quad>;

inline bool quad_finite(quad v) { return v == v && !charpoint::detail::scalar_isinf(v); }

inline quad quad_abs(quad v) { return v < 0 ? -v : v; }

inline quad quad_sup(const QuadVec& v) {
  quad r = 0;
  for (quad e : v) r = std::max(r, quad_abs(e));
  return r;
}

// Gaussian elimination with partial pivoting on a row-major n x n matrix:
// returns det(A) and, when rhs is given, overwrites it with A^-1 rhs.
inline quad quad_eliminate(QuadVec a, std::size_t n, QuadVec* rhs) {
  quad det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (quad_abs(a[r * n + c]) > quad_abs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == 0) return 0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      if (rhs) std::swap((*rhs)[c], (*rhs)[piv]);
      det = -det;
    }
    det *= a[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const quad f = a[r * n + c] / a[c * n + c];
      if (f == 0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      if (rhs) (*rhs)[r] -= f * (*rhs)[c];
    }
  }
  if (rhs) {
    for (std::size_t c = n; c-- > 0;) {
      quad v = (*rhs)[c];
      for (std::size_t k = c + 1; k < n; ++k) v -= a[c * n + k] * (*rhs)[k];
      (*rhs)[c] = v / a[c * n + c];
    }
  }
  return det;
}

inline QuadVec quad_F(const Augmented& sys, const QuadVec& z) {
  const std::size_t m = sys.m, K = sys.K;
  const quad x = z[0];
  const std::span<const quad> y(z.data() + 1, m);
  const std::span<const quad> a(z.data() + 1 + m, K);
  QuadVec f(z.size());
  for (std::size_t i = 0; i < m; ++i) f[i] = evaluate_as<quad>(*sys.cs.main.G[i], x, y, a) - y[i];
  QuadVec ij(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      ij[i * m + j] = (i == j ? quad(1) : quad(0)) - evaluate_as<quad>(*sys.cs.main.J[i][j], x, y, a);
  f[m] = quad_eliminate(ij, m, nullptr);
  for (std::size_t k = 0; k < K; ++k) {
    const std::span<const quad> ak(z.data() + 1 + m + k, 1);
    f[1 + m + k] = evaluate_as<quad>(*sys.cs.aux[k].G[0], x, ak, a.first(k)) - ak[0];
  }
  return f;
}

/// Newton in __float128 from a converged binary64 root. Characteristic points
/// of symmetric systems are often degenerate roots (two solution branches
/// cross there), where binary64 Newton stalls near 1e-6. Steps are undamped,
/// since the residual norm is a poor guide at such roots; the iterate with the
/// smallest residual is kept.
inline Eigen::VectorXd polish_quad(const Augmented& sys, const Eigen::VectorXd& z0) {
  const std::size_t n = static_cast<std::size_t>(z0.size());
  const QuadVec start(z0.data(), z0.data() + n);
  QuadVec z = start;
  QuadVec f = quad_F(sys, z);
  for (quad e : f)
    if (!quad_finite(e)) return z0;
  QuadVec best = z;
  quad best_res = quad_sup(f);
  const quad reach = 1e-3 * std::max(quad(1), quad_sup(start));
  for (int it = 0; it < 100 && best_res > 0; ++it) {
    QuadVec D(n * n);
    for (std::size_t c = 0; c < n; ++c) {
      const quad h = 1e-12 * std::max(quad(1), quad_abs(z[c]));
      QuadVec zp = z, zm = z;
      zp[c] += h;
      zm[c] -= h;
      const QuadVec fp = quad_F(sys, zp), fm = quad_F(sys, zm);
      for (std::size_t r = 0; r < n; ++r) D[r * n + c] = (fp[r] - fm[r]) / (2 * h);
    }
    QuadVec step = f;
    if (quad_eliminate(D, n, &step) == 0) break;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] -= step[i];
      ok = ok && quad_finite(z[i]) && z[i] > 0 && quad_abs(z[i] - start[i]) <= reach;
    }
    if (!ok) break;
    f = quad_F(sys, z);
    const quad r = quad_sup(f);
    if (!quad_finite(r)) break;
    if (r < best_res) {
      best_res = r;
      best = z;
    }
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = static_cast<double>(best[i]);
  return out;
}

/// Moves the start onto y = G(x, y) with x (and the aux values) held fixed:
/// damped Newton in y alone. Returns false when that fails.
inline bool project_onto_solutions(const CompiledSystem& cs, Eigen::VectorXd& z, std::size_t m) {
  const double x = z[0];
  const std::span<const double> a(z.data() + 1 + m, static_cast<std::size_t>(z.size()) - 1 - m);
  auto resid = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
      r[static_cast<Eigen::Index>(i)] = evaluate(cs.main.G[i], x, std::span<const double>(y.data(), m), a) - y[i];
    return r;
  };
  Eigen::VectorXd y = z.segment(1, static_cast<Eigen::Index>(m));
  Eigen::VectorXd r = resid(y);
  for (int it = 0; it < 60; ++it) {
    if (!r.allFinite()) return false;
    if (r.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, y.cwiseAbs().maxCoeff())) {
      z.segment(1, static_cast<Eigen::Index>(m)) = y;
      return true;
    }
    const Matrix J = evaluate_matrix(cs.main.J, x, std::span<const double>(y.data(), m), a);
    const Eigen::VectorXd step =
        (Matrix::Identity(J.rows(), J.cols()) - J).fullPivLu().solve(r);
    if (!step.allFinite()) return false;
    double t = 1.0;
    for (Eigen::Index i = 0; i < step.size(); ++i)
      if (step[i] < 0.0 && y[i] + t * step[i] <= 0.0) t = 0.9 * y[i] / -step[i];
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt, t *= 0.5) {
      const Eigen::VectorXd yn = y + t * step;
      const Eigen::VectorXd rn = resid(yn);
      if (rn.allFinite() && rn.norm() < (1.0 - 1e-4 * t) * r.norm()) {
        y = yn;
        r = rn;
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return false;
}

/// Damped Newton from z; returns the final iterate and its residual.
inline std::pair<Eigen::VectorXd, double> newton(const Augmented& sys, Eigen::VectorXd z) {
  Eigen::VectorXd f = sys.F(z);
  if (!f.allFinite()) return {z, std::numeric_limits<double>::infinity()};
  double norm = f.norm();
  for (int it = 0; it < 100; ++it) {
    if (sup_norm(f) <= 1e-15 * std::max(1.0, sup_norm(z))) break;
    const auto D = sys.jacobian(z, f);
    if (!D) break;
    const Eigen::VectorXd step = D->fullPivLu().solve(f);
    if (!step.allFinite()) break;
    double t = 1.0;
    // stay in the positive orthant
    for (int i = 0; i < step.size(); ++i)
      if (step[i] > 0.0 && z[i] - t * step[i] <= 0.0) t = 0.9 * z[i] / step[i];
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      const Eigen::VectorXd zn = z - t * step;
      const Eigen::VectorXd fn = sys.F(zn);
      if (fn.allFinite() && fn.norm() < (1.0 - 1e-4 * t) * norm) {
        z = zn;
        f = fn;
        norm = f.norm();
        moved = true;
        break;
      }
    }
    if (!moved) break;
    if (sup_norm(t * step) <= 1e-15 * std::max(1.0, sup_norm(z))) break;
  }
  return {z, sup_norm(f)};
}

// Halton radical inverse in base p.
inline double halton(std::uint64_t i, unsigned p) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= p;
    r += f * static_cast<double>(i % p);
    i /= p;
  }
  return r;
}

inline unsigned nth_prime(std::size_t d) {
  static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (d < std::size(primes)) return primes[d];
  unsigned p = 53;
  for (std::size_t k = std::size(primes); k <= d;) {
    p += 2;
    bool prime = true;
    for (unsigned q = 3; q * q <= p; q += 2)
      if (p % q == 0) prime = false;
    if (prime) ++k;
  }
  return p;
}

}  // namespace detail

/// Radius of each aux series (with the earlier ones it depends on).
inline std::vector<double> aux_radii(const CompiledSystem& cs) {
  std::vector<double> r;
  for (std::size_t k = 0; k < cs.aux.size(); ++k) r.push_back(domain_radius(CompiledSystem(cs.spec.aux_system(k))));
  return r;
}

/// x in (0, 1.2 rho_hat], y_i in (0, 10 tau_i] with tau from T at the radius.
inline SearchBox default_search_box(const CompiledSystem& cs, double rho_hat) {
  if (!(rho_hat > 0.0) || !std::isfinite(rho_hat)) throw CharptError("default_search_box: radius estimate must be positive");
  const double r = std::min(rho_hat, domain_radius(cs, rho_hat));
  const PointEval pe = eval_point(cs, r);
  SearchBox box;
  box.x_max = 1.2 * rho_hat;
  for (std::size_t i = 0; i < cs.main.arity(); ++i) {
    const double t = pe.finite ? pe.T_values[i] : 1.0;
    box.y_max.push_back(10.0 * std::max(t, 1e-3));
  }
  return box;
}

/// Annotates a solved point with Lambda, the eigenpoint flag and location.
inline CharPoint annotate(const CompiledSystem& cs, CharPoint p, double eigentol, const std::vector<double>& radii) {
  p.lambda = perron_root(evaluate_matrix(cs.main.J, p.a, p.b, p.aux));
  p.is_eigenpoint = std::fabs(p.lambda - 1.0) <= eigentol;
  constexpr double delta = 1e-3;
  std::vector<double> yi;
  for (double v : p.b) yi.push_back((1.0 + delta) * v);
  const double xi = (1.0 + delta) * p.a;
  const std::vector<double> ai = aux_values(cs, xi);
  bool inflated_finite = all_finite(ai);
  if (inflated_finite) {
    inflated_finite = all_finite(evaluate_all(cs.main.G, xi, yi, ai)) &&
                      evaluate_matrix(cs.main.J, xi, yi, ai).allFinite();
  }
  p.location = Location::unknown;
  if (inflated_finite) {
    p.location = Location::interior;
  } else {
    for (double r : radii)
      if (std::fabs(p.a - r) <= 1e-6 * r) p.location = Location::boundary;
  }
  return p;
}

/// Positive solutions of the characteristic system found by damped Newton
/// from n_starts scrambled Halton points in the box. Deduplicated, sorted by
/// a descending. Finding none does not prove there are none.
inline std::vector<CharPoint> find_char_points(const CompiledSystem& cs, const SearchBox& box,
                                               const SearchOptions& opt = {}) {
  const std::size_t m = cs.main.arity(), K = cs.aux.size();
  if (box.y_max.size() != m) throw CharptError("find_char_points: search box has the wrong dimension");
  if (!(box.x_max > 0.0)) throw CharptError("find_char_points: search box must be positive");
  for (double v : box.y_max)
    if (!(v > 0.0)) throw CharptError("find_char_points: search box must be positive");
  if (opt.n_starts < 1) throw CharptError("find_char_points: need at least one start");

  const detail::Augmented sys(cs);
  const std::vector<double> radii = aux_radii(cs);
  const double aux_cap = radii.empty() ? INFINITY : *std::min_element(radii.begin(), radii.end());

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(1 + m);
  for (double& s : shift) s = unit(rng);

  std::vector<CharPoint> found;
  auto consider = [&](const Eigen::VectorXd& sol, double res) {
    CharPoint p;
    p.a = sol[0];
    p.b.assign(sol.data() + 1, sol.data() + 1 + m);
    p.aux.assign(sol.data() + 1 + m, sol.data() + 1 + m + K);
    p.residual = res;
    // each aux value must be the least fixed point, where dg/da <= 1
    bool least = true;
    for (std::size_t k = 0; k < K; ++k) {
      const double v[1] = {p.aux[k]};
      const double slope = evaluate(cs.aux[k].J[0][0], p.a, v, std::span<const double>(p.aux.data(), k));
      if (!(slope <= 1.0 + 1e-6)) least = false;
    }
    if (!least) return;

    bool duplicate = false;
    for (auto& q : found) {
      double dist = std::fabs(q.a - p.a);
      for (std::size_t i = 0; i < m; ++i) dist = std::max(dist, std::fabs(q.b[i] - p.b[i]));
      if (dist < kDedupDistance) {
        duplicate = true;
        if (p.residual < q.residual) q = p;
        break;
      }
    }
    if (!duplicate) found.push_back(p);
  };

  for (int s = 0; s < opt.n_starts; ++s) {
    Eigen::VectorXd z(sys.dim());
    for (std::size_t d = 0; d <= m; ++d) {
      double u = detail::halton(static_cast<std::uint64_t>(s) + 1, detail::nth_prime(d)) + shift[d];
      u -= std::floor(u);
      if (u <= 0.0) u = 0.5;
      z[static_cast<Eigen::Index>(d)] = u * (d == 0 ? box.x_max : box.y_max[d - 1]);
    }
    if (K > 0) {
      const std::vector<double> a = aux_values(cs, std::min(z[0], aux_cap));
      if (!all_finite(a)) continue;
      for (std::size_t k = 0; k < K; ++k) z[static_cast<Eigen::Index>(1 + m + k)] = std::max(a[k], 1e-300);
    }

    Eigen::VectorXd zp = z;
    const bool projected = detail::project_onto_solutions(cs, zp, m);
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt == 1 && !projected) break;
      auto [sol, res] = detail::newton(sys, attempt == 0 ? z : zp);
      if (!(res <= kCharTolerance)) continue;
      if ((sol.array() <= 0.0).any()) continue;
      sol = detail::polish_quad(sys, sol);
      res = detail::sup_norm(sys.F(sol));
      if (!(res <= kCharTolerance)) continue;
      consider(sol, res);
    }
  }

  for (auto& p : found) p = annotate(cs, p, opt.eigentol, radii);
  std::sort(found.begin(), found.end(), [](const CharPoint& l, const CharPoint& r) { return l.a > r.a; });
  return found;
}

// ---------------------------------------------------------------- classification

enum class ExtremeMethod { eigenpoint, boundary_estimated };

inline const char* to_string(ExtremeMethod m) {
  return m == ExtremeMethod::eigenpoint ? "eigenpoint" : "boundary-estimated";
}

struct ExtremeReport {
  double rho = 0.0;
  std::vector<double> tau;
  ExtremeMethod method = ExtremeMethod::eigenpoint;
  double lambda_at_extreme = 0.0;
  double cross_check_rho = 0.0;  // radius estimate from the coefficients
  double cross_check_gap = 0.0;  // |rho - cross_check_rho| / rho
  std::vector<std::string> warnings;
};

/// Picks the extreme point. One eigenpoint: that point. None: rho is the
/// largest x with T(x) finite, bracketed from the coefficient estimate, and
/// tau = T(rho). Two or more: MultipleEigenpointsError.
inline ExtremeReport classify(const std::vector<CharPoint>& points, const CompiledSystem& cs, double rho_hat,
                              double eigentol = 1e-6) {
  std::vector<const CharPoint*> eigen;
  for (const auto& p : points)
    if (p.is_eigenpoint) eigen.push_back(&p);
  if (eigen.size() > 1) {
    std::string msg = "found " + std::to_string(eigen.size()) + " eigenpoints (at a =";
    for (const auto* p : eigen) msg += " " + std::to_string(p->a);
    throw MultipleEigenpointsError(msg + "); a system has at most one");
  }
  ExtremeReport r;
  r.cross_check_rho = rho_hat;
  if (eigen.size() == 1) {
    r.method = ExtremeMethod::eigenpoint;
    r.rho = eigen[0]->a;
    r.tau = eigen[0]->b;
    r.lambda_at_extreme = eigen[0]->lambda;
  } else {
    r.method = ExtremeMethod::boundary_estimated;
    const double seed = rho_hat > 0.0 && std::isfinite(rho_hat) ? rho_hat : 0.25;
    r.rho = domain_radius(cs, seed);
    if (!std::isfinite(r.rho)) throw CharptError("classify: the solution appears to be entire");
    const PointEval pe = eval_point(cs, r.rho);
    if (!pe.finite) throw CharptError("classify: T is not finite at the estimated radius");
    r.tau = pe.T_values;
    r.lambda_at_extreme = pe.lambda;
    if (!(pe.lambda < 1.0 - eigentol))
      r.warnings.push_back("Lambda at the boundary estimate is not below 1; an eigenpoint may have been missed");
  }
  r.cross_check_gap = std::fabs(r.rho - rho_hat) / r.rho;
  return r;
}

struct AntichainResult {
  bool holds = true;
  std::optional<std::pair<std::size_t, std::size_t>> offending;  // (lower, upper)
};

/// No point lies componentwise below another (1e-9 per coordinate).
inline AntichainResult antichain_check(const std::vector<CharPoint>& points, double tol = 1e-9) {
  auto leq = [&](const CharPoint& p, const CharPoint& q) {
    if (p.a > q.a + tol) return false;
    for (std::size_t i = 0; i < p.b.size(); ++i)
      if (p.b[i] > q.b[i] + tol) return false;
    return true;
  };
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j)
      if (i != j && leq(points[i], points[j])) return {false, std::make_pair(i, j)};
  return {};
}

/// The point with the largest a; a tie within 1e-9 is an error.
inline const CharPoint& largest_a_candidate(const std::vector<CharPoint>& points) {
  if (points.empty()) throw CharptError("largest_a_candidate: no points");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].a > points[best].a) best = i;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (i != best && std::fabs(points[i].a - points[best].a) <= 1e-9)
      throw CharptError("largest_a_candidate: two points share the largest a = " + std::to_string(points[best].a));
  return points[best];
}

}  // namespace charpoint
