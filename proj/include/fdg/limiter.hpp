#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fdg/core2d.hpp"
#include "fdg/errors.hpp"
#include "fdg/euler.hpp"
#include "fdg/mesh2d.hpp"

namespace fdg::limiter {

using core2d::ElementFluxes;
using core2d::Flux;
using core2d::State;
using mesh2d::Vec2;

/// Per-node density bounds from bar states over the low-order stencil.
struct IdpBounds {
  std::vector<double> rho_min;
  std::vector<double> rho_max;
};

/// Nodal provisional coefficients and the subcell-interface coefficients
/// derived from them; interface storage follows ElementFluxes.
struct BlendField {
  std::vector<double> nodal;
  std::vector<std::array<std::vector<double>, 2>> interface;
};

struct AlphaDiagnostics {
  /// largest amount by which the pure FV candidate already left its bounds
  double fv_bound_violation = 0.0;
  std::size_t clamped_nodes = 0;
};

/// Result of one limited right-hand side evaluation.
struct StageReport {
  double mean_alpha = 0.0;
  double bound_violation = 0.0;  ///< forward-Euler candidate vs bounds
  AlphaDiagnostics alpha;
};

/// Absolute slack added to the bounds when solving for the coefficients.
inline constexpr double alpha_bound_slack = 1e-11;

/// The two states and the normal on interface s of line t, direction d.
/// s = 0 and s = N+1 reach into the neighbouring elements' boundary nodes.
struct InterfaceStates {
  const State* left;
  const State* right;
  Vec2 normal;
};

/// Subcell DG/FV blending on top of a 2D DGSEM discretization.
class SubcellLimiter {
 public:
  explicit SubcellLimiter(const core2d::Dgsem2D& dg)
      : dg_(&dg), normals_(mesh2d::subcell_normals(dg.mesh())) {}

  const core2d::Dgsem2D& dg() const { return *dg_; }
  const mesh2d::SubcellNormals& normals() const { return normals_; }

  InterfaceStates interface_states(std::span<const State> u, std::size_t e, int d,
                                   std::size_t t, std::size_t s) const {
    const auto& mesh = dg_->mesh();
    const std::size_t n = mesh.n(), m = n * n;
    const Vec2& nv = normals_.elements[e].at(d, t, s, n);
    auto node = [&](std::size_t el, std::size_t k) {
      return &u[el * m + core2d::line_node(d, t, k, n)];
    };
    if (s == 0) return {node(mesh.neighbor(e, core2d::minus_face(d)), n - 1), node(e, 0), nv};
    if (s == n) return {node(e, n - 1), node(mesh.neighbor(e, core2d::plus_face(d)), 0), nv};
    return {node(e, s - 1), node(e, s), nv};
  }

  /// High-order telescoping fluxes of every element.
  std::vector<ElementFluxes> dg_fluxes(std::span<const State> u) const {
    core2d::FaceData fd;
    dg_->exchange(u, fd);
    std::vector<ElementFluxes> out(dg_->mesh().size());
    for (std::size_t e = 0; e < out.size(); ++e) dg_->element_fluxes(u, fd, e, out[e]);
    return out;
  }

  /// First-order LLF fluxes on every subcell interface, using the subcell
  /// normals inside elements and the face normals between them.
  std::vector<ElementFluxes> fv_fluxes(std::span<const State> u) const {
    const std::size_t n = dg_->n();
    std::vector<ElementFluxes> out(dg_->mesh().size());
    for (std::size_t e = 0; e < out.size(); ++e) {
      for (auto& d : out[e].dir) d.resize((n + 1) * n);
      for (int d = 0; d < 2; ++d)
        for (std::size_t t = 0; t < n; ++t)
          for (std::size_t s = 0; s <= n; ++s) {
            const auto is = interface_states(u, e, d, t, s);
            out[e].at(d, t, s, n) = euler::llf_flux<2>(*is.left, *is.right, is.normal, dg_->gas());
          }
    }
    return out;
  }

  /// min/max of the node's own density and the bar-state densities with its
  /// stencil neighbours (one per side in each direction).
  IdpBounds idp_bounds(std::span<const State> u) const {
    const std::size_t n = dg_->n(), m = n * n;
    IdpBounds b;
    b.rho_min.resize(u.size());
    b.rho_max.resize(u.size());
    for (std::size_t q = 0; q < u.size(); ++q) b.rho_min[q] = b.rho_max[q] = u[q][0];
    for (std::size_t e = 0; e < dg_->mesh().size(); ++e)
      for (int d = 0; d < 2; ++d)
        for (std::size_t t = 0; t < n; ++t)
          for (std::size_t s = 0; s <= n; ++s) {
            const auto is = interface_states(u, e, d, t, s);
            const double rho = euler::bar_state<2>(*is.left, *is.right, is.normal, dg_->gas())[0];
            for (std::size_t k : {s - 1, s}) {
              if (k >= n) continue;  // wraps for s = 0
              const std::size_t q = e * m + core2d::line_node(d, t, k, n);
              b.rho_min[q] = std::min(b.rho_min[q], rho);
              b.rho_max[q] = std::max(b.rho_max[q], rho);
            }
          }
    return b;
  }

  /// Largest step for which the pure FV update is a convex combination of
  /// bar states, scaled by cfl.
  double idp_timestep(std::span<const State> u, double cfl = 1.0) const {
    const auto& mesh = dg_->mesh();
    const std::size_t n = dg_->n(), m = n * n;
    const auto& w = dg_->ops().mass;
    std::vector<double> denom(u.size(), 0.0);
    for (std::size_t e = 0; e < mesh.size(); ++e)
      for (int d = 0; d < 2; ++d)
        for (std::size_t t = 0; t < n; ++t)
          for (std::size_t s = 0; s <= n; ++s) {
            const auto is = interface_states(u, e, d, t, s);
            const double lam =
                euler::max_wavespeed<2>(*is.left, *is.right, is.normal, dg_->gas());
            for (std::size_t k : {s - 1, s}) {
              if (k >= n) continue;
              denom[e * m + core2d::line_node(d, t, k, n)] += w[t] * lam;
            }
          }
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.size(); ++e)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t q = i + n * j;
          dt = std::min(dt, mesh.elements[e].jac[q] * w[i] * w[j] / denom[e * m + q]);
        }
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw DegenerateBarState("IDP time step is not positive (" + std::to_string(dt) + ")");
    return cfl * dt;
  }

  /// Visits the four interfaces of node (i, j) as fn(direction, line,
  /// interface, sign, transverse weight); sign is +1 on the minus side.
  template <class Fn>
  void for_node_interfaces(std::size_t i, std::size_t j, Fn&& fn) const {
    const auto& w = dg_->ops().mass;
    fn(0, j, i, +1.0, w[j]);
    fn(0, j, i + 1, -1.0, w[j]);
    fn(1, i, j, +1.0, w[i]);
    fn(1, i, j + 1, -1.0, w[i]);
  }

  /// Provisional nodal coefficients by sign-split bound enforcement: the
  /// antidiffusive contributions P = (DG - FV) flux differences are scaled by
  /// R+- = min(1, (bound - rho_FV) / sum P+-), and alpha = 1 - min(R+, R-).
  std::vector<double> provisional_alpha(std::span<const State> u, const IdpBounds& b,
                                        const std::vector<ElementFluxes>& dg,
                                        const std::vector<ElementFluxes>& fv, double dt,
                                        AlphaDiagnostics* diag = nullptr) const {
    if (!(dt > 0.0)) throw ContractViolation("provisional_alpha needs a positive step");
    const auto& mesh = dg_->mesh();
    const std::size_t n = dg_->n(), m = n * n;
    const auto& w = dg_->ops().mass;
    std::vector<double> alpha(u.size(), 0.0);
    AlphaDiagnostics local;
    for (std::size_t e = 0; e < mesh.size(); ++e)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t q = e * m + i + n * j;
          const double scale = dt / (mesh.elements[e].jac[i + n * j] * w[i] * w[j]);
          double rho_fv = u[q][0], pp = 0.0, pm = 0.0;
          for_node_interfaces(i, j, [&](int d, std::size_t t, std::size_t s, double sign,
                                           double wt) {
            const double f_fv = fv[e].at(d, t, s, n)[0];
            const double f_dg = dg[e].at(d, t, s, n)[0];
            rho_fv += scale * sign * wt * f_fv;
            const double p = scale * sign * wt * (f_dg - f_fv);
            if (p > 0.0) pp += p; else pm += p;
          });
          const double qp = b.rho_max[q] + alpha_bound_slack - rho_fv;
          const double qm = b.rho_min[q] - alpha_bound_slack - rho_fv;
          double rp = 1.0, rm = 1.0;
          if (qp < 0.0 || qm > 0.0) {
            local.fv_bound_violation = std::max(local.fv_bound_violation, std::max(-qp, qm));
            ++local.clamped_nodes;
            alpha[q] = 1.0;
            continue;
          }
          if (pp > 0.0) rp = std::min(1.0, qp / pp);
          if (pm < 0.0) rm = std::min(1.0, qm / pm);
          alpha[q] = std::clamp(1.0 - std::min(rp, rm), 0.0, 1.0);
        }
    if (diag) *diag = local;
    return alpha;
  }

  /// Interface coefficients as the maximum of the two adjacent nodal values;
  /// element faces take both elements' nodes into account.
  BlendField interface_alpha(std::vector<double> nodal) const {
    const auto& mesh = dg_->mesh();
    const std::size_t n = dg_->n(), m = n * n;
    BlendField bf;
    bf.nodal = std::move(nodal);
    bf.interface.resize(mesh.size());
    for (std::size_t e = 0; e < mesh.size(); ++e)
      for (int d = 0; d < 2; ++d) {
        auto& a = bf.interface[e][static_cast<std::size_t>(d)];
        a.resize((n + 1) * n);
        const std::size_t em = mesh.neighbor(e, core2d::minus_face(d));
        const std::size_t ep = mesh.neighbor(e, core2d::plus_face(d));
        for (std::size_t t = 0; t < n; ++t)
          for (std::size_t s = 0; s <= n; ++s) {
            const double left = s == 0 ? bf.nodal[em * m + core2d::line_node(d, t, n - 1, n)]
                                       : bf.nodal[e * m + core2d::line_node(d, t, s - 1, n)];
            const double right = s == n ? bf.nodal[ep * m + core2d::line_node(d, t, 0, n)]
                                        : bf.nodal[e * m + core2d::line_node(d, t, s, n)];
            a[(n + 1) * t + s] = std::max(left, right);
          }
      }
    return bf;
  }

  /// alpha FV + (1 - alpha) DG on every interface.
  std::vector<ElementFluxes> blend_fluxes(const std::vector<ElementFluxes>& dg,
                                          const std::vector<ElementFluxes>& fv,
                                          const BlendField& bf) const {
    std::vector<ElementFluxes> out(dg.size());
    for (std::size_t e = 0; e < dg.size(); ++e)
      for (std::size_t d = 0; d < 2; ++d) {
        const auto& a = bf.interface[e][d];
        if (dg[e].dir[d].size() != a.size() || fv[e].dir[d].size() != a.size())
          throw ContractViolation("blend_fluxes: mismatched shapes");
        out[e].dir[d].resize(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (!(a[k] >= 0.0 && a[k] <= 1.0))
            throw ContractViolation("blending coefficient outside [0, 1]");
          out[e].dir[d][k] = a[k] * fv[e].dir[d][k] + (1.0 - a[k]) * dg[e].dir[d][k];
        }
      }
    return out;
  }

  /// Subcell update from interface fluxes.
  void assemble(const std::vector<ElementFluxes>& fl, std::span<State> dudt) const {
    const std::size_t m = dg_->mesh().nodes_per_element();
    for (std::size_t e = 0; e < fl.size(); ++e) dg_->assemble(fl[e], e, dudt.subspan(e * m, m));
  }

  /// (1/V) sum_e sum_ij J w_i w_j alpha_ij.
  double mean_alpha(const std::vector<double>& nodal) const {
    const auto& mesh = dg_->mesh();
    const std::size_t m = mesh.nodes_per_element(), n = mesh.n();
    return mesh.integrate([&](std::size_t e, std::size_t i, std::size_t j) {
             return nodal[e * m + i + n * j];
           }) /
           mesh.domain.area();
  }

  /// Largest distance of the densities in `candidate` outside the bounds.
  static double bounds_violation(std::span<const State> candidate, const IdpBounds& b) {
    double v = 0.0;
    for (std::size_t q = 0; q < candidate.size(); ++q) {
      const double rho = candidate[q][0];
      v = std::max({v, b.rho_min[q] - rho, rho - b.rho_max[q]});
    }
    return v;
  }

  /// Limited right-hand side for a stage with step size dt: bounds, both
  /// flux families, coefficients, blending and assembly. `blend` receives the
  /// coefficients when non-null.
  StageReport rhs(std::span<const State> u, double dt, std::span<State> dudt,
                  BlendField* blend = nullptr) const {
    const auto b = idp_bounds(u);
    const auto hi = dg_fluxes(u);
    const auto lo = fv_fluxes(u);
    StageReport rep;
    auto bf = interface_alpha(provisional_alpha(u, b, hi, lo, dt, &rep.alpha));
    assemble(blend_fluxes(hi, lo, bf), dudt);
    std::vector<State> cand(u.begin(), u.end());
    for (std::size_t q = 0; q < cand.size(); ++q) cand[q] += dt * dudt[q];
    rep.bound_violation = bounds_violation(cand, b);
    rep.mean_alpha = mean_alpha(bf.nodal);
    if (blend) *blend = std::move(bf);
    return rep;
  }

 private:
  const core2d::Dgsem2D* dg_;
  mesh2d::SubcellNormals normals_;
};

/// Mean-alpha history: t, mean_alpha, dt, step.
struct HistoryRow {
  double t;
  double mean_alpha;
  double dt;
  std::size_t step;
};

inline void write_history_csv(const std::vector<HistoryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "t,mean_alpha,dt,step\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.t << ',' << r.mean_alpha << ',' << r.dt << ',' << r.step << '\n';
  if (!out) throw Error("write failed: " + path);
}

}  // namespace fdg::limiter
