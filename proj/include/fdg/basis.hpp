#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fdg/errors.hpp"

namespace fdg {

enum class NodeKind { Gauss, GaussLobatto };

inline const char* to_string(NodeKind k) {
  return k == NodeKind::Gauss ? "gauss" : "lobatto";
}

/// Largest supported polynomial degree.
inline constexpr int max_degree = 15;

/// Dense row-major matrix for the small reference-element operators.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct QuadratureRule {
  NodeKind kind = NodeKind::Gauss;
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  /// N+2 staggered points; spacing between consecutive points is a weight.
  std::vector<double> complementary;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

/// Legendre polynomial P_n and its derivative at x by the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  // P_n' from (x^2-1) P_n' = n (x P_n - P_{n-1}); fine away from +-1.
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

inline void check_degree(int n) {
  if (n < 1 || n > max_degree)
    throw InvalidDegree("polynomial degree must be in [1, " + std::to_string(max_degree) +
                        "], got " + std::to_string(n));
}

inline void symmetrize_nodes(std::vector<double>& x, std::vector<double>& w) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double xm = 0.5 * (x[n - 1 - i] - x[i]);
    const double wm = 0.5 * (w[i] + w[n - 1 - i]);
    x[i] = -xm;
    x[n - 1 - i] = xm;
    w[i] = w[n - 1 - i] = wm;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

}  // namespace detail

/// Complementary grid: starts at -1 and advances by one weight per point,
/// xbar_i = xbar_{i-1} + w_{i-1}. The last point is snapped to +1.
inline std::vector<double> complementary_grid(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InconsistentRule("quadrature weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 2.0) > 1e-12)
    throw InconsistentRule("quadrature weights sum to " + std::to_string(sum) + ", expected 2");
  std::vector<double> xbar(weights.size() + 1);
  xbar[0] = -1.0;
  for (std::size_t i = 1; i < xbar.size(); ++i) xbar[i] = xbar[i - 1] + weights[i - 1];
  xbar.back() = 1.0;
  return xbar;
}

/// Legendre-Gauss rule with N+1 points, exact up to degree 2N+1.
inline QuadratureRule gauss_rule(int n) {
  detail::check_degree(n);
  const int m = n + 1;
  QuadratureRule r;
  r.kind = NodeKind::Gauss;
  r.degree = n;
  r.nodes.resize(m);
  r.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    // Chebyshev-like initial guess, ordered ascending.
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      detail::legendre(m, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    detail::legendre(m, x, p, dp);
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  detail::symmetrize_nodes(r.nodes, r.weights);
  r.complementary = complementary_grid(r.weights);
  return r;
}

/// Legendre-Gauss-Lobatto rule with N+1 points including both endpoints,
/// exact up to degree 2N-1.
inline QuadratureRule lobatto_rule(int n) {
  detail::check_degree(n);
  const int m = n + 1;
  QuadratureRule r;
  r.kind = NodeKind::GaussLobatto;
  r.degree = n;
  r.nodes.resize(m);
  r.weights.resize(m);
  r.nodes.front() = -1.0;
  r.nodes.back() = 1.0;
  for (int i = 1; i < n; ++i) {
    // Interior nodes are roots of P_N'; Newton on q = P_N' using
    // (1-x^2) P_N'' = 2x P_N' - N(N+1) P_N.
    double x = -std::cos(std::numbers::pi * i / n);
    for (int it = 0; it < 100; ++it) {
      double p = 0.0, dp = 0.0;
      detail::legendre(n, x, p, dp);
      const double d2p = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = x;
  }
  for (int i = 0; i < m; ++i) {
    double p = 0.0, dp = 0.0;
    const double x = r.nodes[i];
    if (i == 0 || i == n) {
      p = (i == 0 && n % 2 == 1) ? -1.0 : 1.0;
    } else {
      detail::legendre(n, x, p, dp);
    }
    r.weights[i] = 2.0 / (n * (n + 1.0) * p * p);
  }
  detail::symmetrize_nodes(r.nodes, r.weights);
  r.complementary = complementary_grid(r.weights);
  return r;
}

inline QuadratureRule make_rule(NodeKind kind, int n) {
  return kind == NodeKind::Gauss ? gauss_rule(n) : lobatto_rule(n);
}

/// Lagrange basis polynomial l_j(x) on the given nodes.
inline double lagrange_eval(std::span<const double> nodes, std::size_t j, double x) {
  if (j >= nodes.size()) throw ContractViolation("lagrange index out of range");
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (nodes[a] == nodes[b]) throw DegenerateBasis("duplicate interpolation nodes");
  double l = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (k != j) l *= (x - nodes[k]) / (nodes[j] - nodes[k]);
  return l;
}

/// Derivative l_j'(x) by the product rule; used for off-node evaluation.
inline double lagrange_derivative(std::span<const double> nodes, std::size_t j, double x) {
  double sum = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    if (m == j) continue;
    double term = 1.0 / (nodes[j] - nodes[m]);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k == j || k == m) continue;
      term *= (x - nodes[k]) / (nodes[j] - nodes[k]);
    }
    sum += term;
  }
  return sum;
}

/// Reference-element operators for one rule. The mass matrix is the diagonal
/// of weights (Jacobians are applied by the caller). Immutable once built.
struct Operators1D {
  QuadratureRule rule;
  std::vector<double> mass;  ///< diagonal of M
  Matrix D;                  ///< D_ij = l_j'(xi_i)
  Matrix Vf;                 ///< rows l_j(-1), l_j(+1)
  std::array<double, 2> B{-1.0, 1.0};
  Matrix S;                  ///< 2 M D - Vf^T B Vf, skew-symmetric

  std::size_t size() const { return rule.size(); }
  bool is_lobatto() const { return rule.kind == NodeKind::GaussLobatto; }
  double left(std::size_t j) const { return Vf(0, j); }
  double right(std::size_t j) const { return Vf(1, j); }
};

inline Operators1D build_operators(const QuadratureRule& rule) {
  const std::size_t n = rule.size();
  const auto& x = rule.nodes;
  Operators1D ops;
  ops.rule = rule;
  ops.mass = rule.weights;

  // Barycentric weights give a well-conditioned derivative matrix.
  std::vector<double> bw(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) bw[j] *= (x[j] - x[k]);
    if (bw[j] == 0.0) throw DegenerateBasis("duplicate interpolation nodes");
    bw[j] = 1.0 / bw[j];
  }
  ops.D = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      ops.D(i, j) = (bw[j] / bw[i]) / (x[i] - x[j]);
      diag -= ops.D(i, j);
    }
    ops.D(i, i) = diag;
  }

  ops.Vf = Matrix(2, n);
  if (rule.kind == NodeKind::GaussLobatto) {
    ops.Vf(0, 0) = 1.0;
    ops.Vf(1, n - 1) = 1.0;
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      ops.Vf(0, j) = lagrange_eval(x, j, -1.0);
      ops.Vf(1, j) = lagrange_eval(x, j, 1.0);
    }
  }

  ops.S = Matrix(n, n);
  double smax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double boundary =
          ops.Vf(0, i) * ops.B[0] * ops.Vf(0, j) + ops.Vf(1, i) * ops.B[1] * ops.Vf(1, j);
      ops.S(i, j) = 2.0 * ops.mass[i] * ops.D(i, j) - boundary;
      smax = std::max(smax, std::abs(ops.S(i, j)));
    }
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) asym = std::max(asym, std::abs(ops.S(i, j) + ops.S(j, i)));
  if (asym > 1e-12 * std::max(1.0, smax))
    throw OperatorConstruction("S is not skew-symmetric (max |S+S^T| = " + std::to_string(asym) +
                               ")");
  for (std::size_t i = 0; i < n; ++i) {
    ops.S(i, i) = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double s = 0.5 * (ops.S(i, j) - ops.S(j, i));
      ops.S(i, j) = s;
      ops.S(j, i) = -s;
    }
  }
  return ops;
}

/// Debug dump: one matrix per file, one row per line, 17 significant digits.
inline void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace fdg
