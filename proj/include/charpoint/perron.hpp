#pragma once

// Perron root Lambda(M) of a nonnegative square matrix, with normalized left
// and right eigenvectors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace charpoint {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class PerronError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PerronResult {
  double lambda = 0.0;
  std::vector<double> left_vector;
  std::vector<double> right_vector;
  double residual = 0.0;
  bool simple = true;
  int iterations = 0;
};

struct PerronOptions {
  double tolerance = 1e-12;  // relative width of the Collatz-Wielandt bracket
  int max_iterations = 100000;
};

/// min_i (Mx)_i / x_i, a lower bound for Lambda(M) when x > 0.
inline double collatz_wielandt_check(const Matrix& m, const Vector& x) {
  if (m.rows() != m.cols() || m.rows() != x.size()) throw PerronError("collatz_wielandt_check: dimension mismatch");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x[i] > 0.0)) throw PerronError("collatz_wielandt_check: x must be strictly positive");
  const Vector mx = m * x;
  double lo = mx[0] / x[0];
  for (Eigen::Index i = 1; i < x.size(); ++i) lo = std::min(lo, mx[i] / x[i]);
  return lo;
}

namespace detail {

/// Strongly connected components of the digraph i -> j iff m(i, j) != 0, in
/// an order where every edge between components points to an earlier one.
inline std::vector<std::vector<int>> strong_components(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::vector<int>> comps;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w = 0; w < n; ++w) {
      if (m(v, w) == 0.0) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return comps;
}

inline void validate_nonnegative(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw PerronError("lambda_max: matrix must be square and nonempty");
  bool nonzero = false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) throw PerronError("lambda_max: non-finite entry");
      if (v < 0.0) throw PerronError("lambda_max: negative entry");
      if (v != 0.0) nonzero = true;
    }
  if (!nonzero) throw PerronError("lambda_max: zero matrix");
}

struct PowerResult {
  double lambda;
  Vector v;
  int iterations;
};

/// Power iteration on M/s + cI for irreducible M, c = 1 + max diagonal of M/s,
/// s = max row sum. Stops on the relative width of the bracket for M itself.
inline PowerResult shifted_power(const Matrix& m, const PerronOptions& opt) {
  const Eigen::Index n = m.rows();
  if (n == 1) return {m(0, 0), Vector::Ones(1), 0};
  const double scale = m.rowwise().sum().maxCoeff();
  const Matrix a = m / scale;
  const double c = 1.0 + a.diagonal().maxCoeff();
  Vector v = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Vector av = a * v;
    double lo = av[0] / v[0], hi = lo;
    for (Eigen::Index i = 1; i < n; ++i) {
      const double r = av[i] / v[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (hi - lo <= opt.tolerance * hi) return {0.5 * (lo + hi) * scale, v, it};
    Vector w = av + c * v;
    v = w / w.sum();
  }
  throw PerronError("lambda_max: power iteration did not converge within " + std::to_string(opt.max_iterations) +
                    " iterations");
}

/// Nonnegative eigenvector for lambda by inverse iteration (reducible case).
inline Vector inverse_iteration(const Matrix& m, double lambda) {
  const Eigen::Index n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double shift = lambda + 1e-10 * scale;
  Eigen::PartialPivLU<Matrix> lu(shift * Matrix::Identity(n, n) - m);
  Vector v = Vector::Ones(n);
  for (int it = 0; it < 4; ++it) {
    v = lu.solve(v).cwiseAbs();
    v /= v.sum();
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (v[i] < 1e-14) v[i] = 0.0;
  return v / v.sum();
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

/// Lambda(M) for a nonnegative, nonzero matrix with finite entries.
///
/// Irreducible matrices use shifted power iteration. Reducible ones take the
/// largest Perron root over the diagonal blocks of their strong components;
/// the root is simple iff exactly one block attains it.
inline PerronResult lambda_max(const Matrix& m, const PerronOptions& opt = {}) {
  detail::validate_nonnegative(m);
  const auto comps = detail::strong_components(m);
  PerronResult r;
  if (comps.size() == 1) {
    auto right = detail::shifted_power(m, opt);
    auto left = detail::shifted_power(m.transpose(), opt);
    r.lambda = right.lambda;
    r.iterations = right.iterations + left.iterations;
    r.right_vector = detail::to_std(right.v);
    r.left_vector = detail::to_std(left.v);
    r.residual = (m * right.v - r.lambda * right.v).cwiseAbs().maxCoeff();
    r.simple = true;
    return r;
  }
  std::vector<double> block_lambda;
  for (const auto& comp : comps) {
    const Eigen::Index k = static_cast<Eigen::Index>(comp.size());
    Matrix block(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) block(i, j) = m(comp[i], comp[j]);
    if (block.isZero(0.0)) {
      block_lambda.push_back(0.0);
      continue;
    }
    auto p = detail::shifted_power(block, opt);
    r.iterations += p.iterations;
    block_lambda.push_back(p.lambda);
  }
  r.lambda = *std::max_element(block_lambda.begin(), block_lambda.end());
  int attaining = 0;
  for (double l : block_lambda)
    if (std::fabs(l - r.lambda) <= opt.tolerance * std::max(1.0, r.lambda) * 10) ++attaining;
  r.simple = attaining == 1;
  const Vector right = detail::inverse_iteration(m, r.lambda);
  const Vector left = detail::inverse_iteration(m.transpose(), r.lambda);
  r.right_vector = detail::to_std(right);
  r.left_vector = detail::to_std(left);
  r.residual = (m * right - r.lambda * right).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace charpoint
