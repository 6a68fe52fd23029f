#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fdg/basis.hpp"
#include "fdg/core1d.hpp"
#include "fdg/errors.hpp"
#include "fdg/svec.hpp"

namespace fdg::mesh2d {

using Vec2 = Vector<2>;

struct Rect {
  double x0 = -1.0;
  double x1 = 1.0;
  double y0 = -1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

/// Element faces. Normals on all faces point in the positive reference
/// direction (+xi on faces 0/1, +eta on faces 2/3) and carry the area scaling
/// of the contravariant vector they are interpolated from.
enum Face : std::size_t { XiMinus = 0, XiPlus = 1, EtaMinus = 2, EtaPlus = 3 };

/// Nodal geometry of one element; node (i, j) is stored at i + n j with i
/// running along xi.
struct ElementGeometry {
  std::vector<Vec2> x;
  std::vector<double> jac;
  std::vector<Vec2> ja1;  ///< J grad(xi)  = ( y_eta, -x_eta)
  std::vector<Vec2> ja2;  ///< J grad(eta) = (-y_xi,  x_xi)
  std::array<std::vector<Vec2>, 4> face_normal;
};

/// Periodic Kx x Ky quadrilateral mesh. Immutable after construction.
struct QuadMesh {
  std::size_t kx = 0;
  std::size_t ky = 0;
  Rect domain;
  double amplitude = 0.0;
  Operators1D ops;
  std::vector<ElementGeometry> elements;

  std::size_t size() const { return elements.size(); }
  std::size_t n() const { return ops.size(); }
  std::size_t nodes_per_element() const { return n() * n(); }
  std::size_t element_index(std::size_t ex, std::size_t ey) const { return ex + kx * ey; }

  std::size_t neighbor(std::size_t e, Face f) const {
    const std::size_t ex = e % kx, ey = e / kx;
    switch (f) {
      case XiMinus: return element_index((ex + kx - 1) % kx, ey);
      case XiPlus: return element_index((ex + 1) % kx, ey);
      case EtaMinus: return element_index(ex, (ey + ky - 1) % ky);
      case EtaPlus: return element_index(ex, (ey + 1) % ky);
    }
    return e;
  }

  /// Quadrature of a nodal field: sum_e sum_ij J w_i w_j g(e, i, j).
  template <class Fn>
  double integrate(Fn&& g) const {
    double s = 0.0;
    const std::size_t m = n();
    for (std::size_t e = 0; e < size(); ++e)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i)
          s += elements[e].jac[i + m * j] * ops.mass[i] * ops.mass[j] * g(e, i, j);
    return s;
  }
};

namespace detail {

inline Rect checked(const Rect& r) {
  if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw InvalidMesh("degenerate rectangle");
  return r;
}

/// Periodic warp: x = X + a (Lx/2) s, y = Y + a (Ly/2) s with
/// s = sin(2 pi Xhat) sin(2 pi Yhat); on [-1,1]^2 this is a sin(pi X) sin(pi Y).
inline Vec2 warp(const Rect& d, double a, double X, double Y) {
  const double xh = (X - d.x0) / d.width();
  const double yh = (Y - d.y0) / d.height();
  const double s = std::sin(2.0 * std::numbers::pi * xh) * std::sin(2.0 * std::numbers::pi * yh);
  return Vec2{{X + 0.5 * a * d.width() * s, Y + 0.5 * a * d.height() * s}};
}

inline void face_normals(const Operators1D& ops, ElementGeometry& g) {
  const std::size_t n = ops.size();
  for (auto& f : g.face_normal) f.assign(n, Vec2{});
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t k = 0; k < n; ++k) {
      g.face_normal[XiMinus][t] += ops.left(k) * g.ja1[k + n * t];
      g.face_normal[XiPlus][t] += ops.right(k) * g.ja1[k + n * t];
      g.face_normal[EtaMinus][t] += ops.left(k) * g.ja2[t + n * k];
      g.face_normal[EtaPlus][t] += ops.right(k) * g.ja2[t + n * k];
    }
}

}  // namespace detail

/// Mesh with an optional sinusoidal warp. The mapping of each element is the
/// degree-N interpolant of the warp on Gauss-Lobatto points, so shared faces
/// coincide and the metric terms are exact polynomials.
inline QuadMesh build_warped_mesh(std::size_t kx, std::size_t ky, const Rect& domain,
                                  const QuadratureRule& rule, double amplitude) {
  if (kx < 1 || ky < 1) throw InvalidMesh("element counts must be positive");
  if (!std::isfinite(amplitude)) throw InvalidWarp("warp amplitude must be finite");
  QuadMesh m;
  m.kx = kx;
  m.ky = ky;
  m.domain = detail::checked(domain);
  m.amplitude = amplitude;
  m.ops = build_operators(rule);
  const std::size_t n = m.n();
  const auto& xi = rule.nodes;
  const double dx = domain.width() / static_cast<double>(kx);
  const double dy = domain.height() / static_cast<double>(ky);

  const auto geo = lobatto_rule(rule.degree);
  const auto& gx = geo.nodes;
  // Interpolation and derivative matrices from geometry points to solution nodes.
  Matrix L(n, n), Ld(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a) {
      L(i, a) = lagrange_eval(gx, a, xi[i]);
      Ld(i, a) = lagrange_derivative(gx, a, xi[i]);
    }

  m.elements.resize(kx * ky);
  for (std::size_t ey = 0; ey < ky; ++ey)
    for (std::size_t ex = 0; ex < kx; ++ex) {
      auto& g = m.elements[m.element_index(ex, ey)];
      g.x.resize(n * n);
      g.jac.resize(n * n);
      g.ja1.resize(n * n);
      g.ja2.resize(n * n);
      if (amplitude == 0.0) {
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t q = i + n * j;
            g.x[q] = Vec2{{domain.x0 + dx * (static_cast<double>(ex) + 0.5 * (xi[i] + 1.0)),
                           domain.y0 + dy * (static_cast<double>(ey) + 0.5 * (xi[j] + 1.0))}};
            g.jac[q] = 0.25 * dx * dy;
            g.ja1[q] = Vec2{{0.5 * dy, 0.0}};
            g.ja2[q] = Vec2{{0.0, 0.5 * dx}};
          }
      } else {
        std::vector<Vec2> p(n * n);
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t a = 0; a < n; ++a)
            p[a + n * b] = detail::warp(
                domain, amplitude, domain.x0 + dx * (static_cast<double>(ex) + 0.5 * (gx[a] + 1.0)),
                domain.y0 + dy * (static_cast<double>(ey) + 0.5 * (gx[b] + 1.0)));
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < n; ++i) {
            Vec2 pos{}, d_xi{}, d_eta{};
            for (std::size_t b = 0; b < n; ++b)
              for (std::size_t a = 0; a < n; ++a) {
                pos += (L(i, a) * L(j, b)) * p[a + n * b];
                d_xi += (Ld(i, a) * L(j, b)) * p[a + n * b];
                d_eta += (L(i, a) * Ld(j, b)) * p[a + n * b];
              }
            const std::size_t q = i + n * j;
            g.x[q] = pos;
            g.jac[q] = d_xi[0] * d_eta[1] - d_eta[0] * d_xi[1];
            g.ja1[q] = Vec2{{d_eta[1], -d_eta[0]}};
            g.ja2[q] = Vec2{{-d_xi[1], d_xi[0]}};
            if (!(g.jac[q] > 0.0)) {
              std::ostringstream os;
              os << "nonpositive Jacobian " << g.jac[q] << " in element (" << ex << ", " << ey
                 << ") for warp amplitude " << amplitude;
              throw InvalidWarp(os.str());
            }
          }
      }
      detail::face_normals(m.ops, g);
    }

  // Shared faces carry one normal; both sides get the mean of their values.
  for (std::size_t e = 0; e < m.size(); ++e) {
    for (Face f : {XiPlus, EtaPlus}) {
      const Face opp = f == XiPlus ? XiMinus : EtaMinus;
      auto& a = m.elements[e].face_normal[f];
      auto& b = m.elements[m.neighbor(e, f)].face_normal[opp];
      for (std::size_t t = 0; t < n; ++t) a[t] = b[t] = 0.5 * (a[t] + b[t]);
    }
  }
  return m;
}

inline QuadMesh build_cartesian_mesh(std::size_t kx, std::size_t ky, const Rect& domain,
                                     const QuadratureRule& rule) {
  return build_warped_mesh(kx, ky, domain, rule, 0.0);
}

/// Largest nodal residual of the discrete metric identity
/// sum_k D_ik (Ja1)_kj + D_jk (Ja2)_ik = 0.
inline double metric_identity_residual(const QuadMesh& m) {
  const std::size_t n = m.n();
  const auto& D = m.ops.D;
  double r = 0.0;
  for (const auto& g : m.elements)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        Vec2 s{};
        for (std::size_t k = 0; k < n; ++k) {
          s += D(i, k) * g.ja1[k + n * j];
          s += D(j, k) * g.ja2[i + n * k];
        }
        r = std::max(r, max_abs(s));
      }
  return r;
}

inline double min_jacobian(const QuadMesh& m) {
  double jmin = std::numeric_limits<double>::infinity();
  for (const auto& g : m.elements)
    for (double j : g.jac) jmin = std::min(jmin, j);
  return jmin;
}

/// Mismatch between the two sides of every shared face; zero by construction.
inline double watertightness_residual(const QuadMesh& m) {
  double r = 0.0;
  for (std::size_t e = 0; e < m.size(); ++e)
    for (Face f : {XiPlus, EtaPlus}) {
      const Face opp = f == XiPlus ? XiMinus : EtaMinus;
      const auto& a = m.elements[e].face_normal[f];
      const auto& b = m.elements[m.neighbor(e, f)].face_normal[opp];
      for (std::size_t t = 0; t < a.size(); ++t) r = std::max(r, max_abs(a[t] - b[t]));
    }
  return r;
}

/// Subcell normals of one element. dir[0] holds, for every row j, the N+2
/// normals n_(i,i+1)j at (N+2) j + (i+1); dir[1] holds, for every column i,
/// the normals n_i(j,j+1) at (N+2) i + (j+1). Entry 0 of a line is the face
/// normal on the minus side and entry N+1 the one on the plus side.
struct ElementSubcellNormals {
  std::array<std::vector<Vec2>, 2> dir;

  const Vec2& at(int d, std::size_t line, std::size_t s, std::size_t n) const {
    return dir[static_cast<std::size_t>(d)][(n + 1) * line + s];
  }
};

struct SubcellNormals {
  std::vector<ElementSubcellNormals> elements;
  double max_closure = 0.0;  ///< largest |recurrence end - face normal| seen
};

inline constexpr double subcell_closure_tolerance = 1e-12;

/// Subcell normal recurrence along one coordinate line:
///   n_(i,i+1) = n_(i-1,i) + sum_k S_ik {{Ja}}_(i,k)
///              - l_i(-1) [ Ja_i/2 - sum_k l_k(-1) Ja_k/2 + n_L ]
///              + l_i(+1) [ Ja_i/2 - sum_k l_k(+1) Ja_k/2 + n_R ].
/// `ja(k)` returns the contravariant vector at node k of the line. Returns
/// the closure mismatch of the last entry against n_R.
template <class JaFn>
double subcell_line(const Operators1D& ops, JaFn&& ja, const Vec2& nL, const Vec2& nR,
                    Vec2* out) {
  const std::size_t n = ops.size();
  Vec2 gL{}, gR{};
  for (std::size_t k = 0; k < n; ++k) {
    gL += (0.5 * ops.left(k)) * ja(k);
    gR += (0.5 * ops.right(k)) * ja(k);
  }
  out[0] = nL;
  Vec2 cur = nL;
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 next = cur;
    const Vec2 ji = ja(i);
    for (std::size_t k = 0; k < n; ++k)
      if (ops.S(i, k) != 0.0) next += ops.S(i, k) * (0.5 * (ji + ja(k)));
    next -= ops.left(i) * (0.5 * ji - gL + nL);
    next += ops.right(i) * (0.5 * ji - gR + nR);
    cur = next;
    if (i + 1 < n) out[i + 1] = next;
  }
  out[n] = nR;
  return max_abs(cur - nR);
}

/// Subcell normals for every element; throws MetricInconsistency when a
/// recurrence does not close onto the element face normal.
inline SubcellNormals subcell_normals(const QuadMesh& m) {
  const std::size_t n = m.n();
  SubcellNormals out;
  out.elements.resize(m.size());
  for (std::size_t e = 0; e < m.size(); ++e) {
    const auto& g = m.elements[e];
    auto& sn = out.elements[e];
    for (auto& d : sn.dir) d.assign((n + 1) * n, Vec2{});
    double scale = 0.0;
    for (std::size_t q = 0; q < n * n; ++q)
      scale = std::max({scale, max_abs(g.ja1[q]), max_abs(g.ja2[q])});
    for (std::size_t t = 0; t < n; ++t) {
      const double r1 = subcell_line(
          m.ops, [&](std::size_t k) { return g.ja1[k + n * t]; }, g.face_normal[XiMinus][t],
          g.face_normal[XiPlus][t], &sn.dir[0][(n + 1) * t]);
      const double r2 = subcell_line(
          m.ops, [&](std::size_t k) { return g.ja2[t + n * k]; }, g.face_normal[EtaMinus][t],
          g.face_normal[EtaPlus][t], &sn.dir[1][(n + 1) * t]);
      const double r = (std::isnan(r1) || std::isnan(r2)) ? r1 + r2
                                                          : std::max(r1, r2) / std::max(1.0, scale);
      out.max_closure = std::max(out.max_closure, r);
      if (!(r <= subcell_closure_tolerance)) {
        std::ostringstream os;
        os << "subcell normal recurrence misses the face normal by " << r << " in element " << e
           << ", line " << t;
        throw MetricInconsistency(os.str());
      }
    }
  }
  return out;
}

/// Discrete Gauss theorem per subcell: w_j (n_(i,i+1)j - n_(i-1,i)j) +
/// w_i (n_i(j,j+1) - n_i(j-1,j)); returns the largest magnitude.
inline double subcell_gauss_residual(const QuadMesh& m, const SubcellNormals& sn) {
  const std::size_t n = m.n();
  const auto& w = m.ops.mass;
  double r = 0.0;
  for (const auto& el : sn.elements)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 s = w[j] * (el.at(0, j, i + 1, n) - el.at(0, j, i, n)) +
                       w[i] * (el.at(1, i, j + 1, n) - el.at(1, i, j, n));
        r = std::max(r, max_abs(s));
      }
  return r;
}

/// Text summary: counts, Jacobian range and metric residuals.
inline void write_summary(std::ostream& os, const QuadMesh& m) {
  double jmax = 0.0;
  for (const auto& g : m.elements)
    for (double j : g.jac) jmax = std::max(jmax, j);
  const auto sn = subcell_normals(m);
  os << "mesh " << m.kx << "x" << m.ky << " elements, " << to_string(m.ops.rule.kind)
     << " nodes, N = " << m.ops.rule.degree << "\n"
     << "domain [" << m.domain.x0 << ", " << m.domain.x1 << "] x [" << m.domain.y0 << ", "
     << m.domain.y1 << "], warp amplitude " << m.amplitude << "\n"
     << "nodes " << m.size() * m.nodes_per_element() << "\n"
     << "jacobian min " << min_jacobian(m) << " max " << jmax << "\n"
     << "metric identity residual " << metric_identity_residual(m) << "\n"
     << "face mismatch " << watertightness_residual(m) << "\n"
     << "subcell closure " << sn.max_closure << "\n"
     << "subcell gauss residual " << subcell_gauss_residual(m, sn) << "\n";
}

}  // namespace fdg::mesh2d
