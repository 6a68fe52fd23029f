#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fdg/basis.hpp"
#include "fdg/core1d.hpp"
#include "fdg/errors.hpp"
#include "fdg/euler.hpp"
#include "fdg/mesh2d.hpp"

namespace fdg::core2d {

using State = euler::ConsState<2>;
using Flux = euler::Flux<2>;
using mesh2d::Face;
using mesh2d::Vec2;

struct Scheme2D {
  euler::TwoPointFlux volume_flux = euler::TwoPointFlux::Chandrashekar;
  euler::SurfaceFlux surface_flux{};
  FaceProjection projection = FaceProjection::Entropy;
};

using core1d::Formulation;

inline constexpr double closure_tolerance_2d = 1e-11;

/// Inner face states and surface fluxes of every element, indexed
/// [element][face][transverse node].
struct FaceData {
  std::vector<std::array<std::vector<State>, 4>> inner;
  std::vector<std::array<std::vector<Flux>, 4>> fstar;
};

/// Telescoping fluxes of one element. dir[d] stores, for each line t, the
/// N+2 fluxes at (N+2) t + s, s = 0 being the minus face.
struct ElementFluxes {
  std::array<std::vector<Flux>, 2> dir;

  Flux& at(int d, std::size_t line, std::size_t s, std::size_t n) {
    return dir[static_cast<std::size_t>(d)][(n + 1) * line + s];
  }
  const Flux& at(int d, std::size_t line, std::size_t s, std::size_t n) const {
    return dir[static_cast<std::size_t>(d)][(n + 1) * line + s];
  }
};

/// Node index of entry k on line t in direction d.
inline std::size_t line_node(int d, std::size_t t, std::size_t k, std::size_t n) {
  return d == 0 ? k + n * t : t + n * k;
}

/// Minus / plus face of direction d.
inline Face minus_face(int d) { return d == 0 ? mesh2d::XiMinus : mesh2d::EtaMinus; }
inline Face plus_face(int d) { return d == 0 ? mesh2d::XiPlus : mesh2d::EtaPlus; }

/// Face states along every coordinate line of one element: entropy-projected
/// (u(Vf v)) or directly interpolated. Lobatto elements return boundary nodes.
inline std::array<std::vector<State>, 4> project_faces_2d(const Operators1D& ops,
                                                          std::span<const State> u,
                                                          FaceProjection proj,
                                                          const euler::GasModel& gas) {
  const std::size_t n = ops.size();
  std::array<std::vector<State>, 4> out;
  for (auto& f : out) f.resize(n);
  std::vector<euler::EntropyVars<2>> v;
  if (!ops.is_lobatto() && proj == FaceProjection::Entropy) {
    v.resize(n * n);
    for (std::size_t q = 0; q < n * n; ++q) v[q] = euler::cons_to_entropy<2>(u[q], gas);
  }
  for (int d = 0; d < 2; ++d)
    for (std::size_t t = 0; t < n; ++t) {
      State& left = out[minus_face(d)][t];
      State& right = out[plus_face(d)][t];
      if (ops.is_lobatto()) {
        left = u[line_node(d, t, 0, n)];
        right = u[line_node(d, t, n - 1, n)];
      } else if (proj == FaceProjection::Entropy) {
        euler::EntropyVars<2> vl, vr;
        for (std::size_t k = 0; k < n; ++k) {
          vl.v += ops.left(k) * v[line_node(d, t, k, n)].v;
          vr.v += ops.right(k) * v[line_node(d, t, k, n)].v;
        }
        left = euler::entropy_to_cons<2>(vl, gas);
        right = euler::entropy_to_cons<2>(vr, gas);
      } else {
        left = State{};
        right = State{};
        for (std::size_t k = 0; k < n; ++k) {
          left += ops.left(k) * u[line_node(d, t, k, n)];
          right += ops.right(k) * u[line_node(d, t, k, n)];
        }
      }
    }
  return out;
}

/// Periodic 2D DGSEM in flux-differencing form. The global state is
/// element-major with (N+1)^2 nodes per element (node i + n j).
class Dgsem2D {
 public:
  Dgsem2D(const mesh2d::QuadMesh& mesh, euler::GasModel gas, Scheme2D scheme)
      : mesh_(&mesh), gas_(gas), scheme_(scheme) {}

  const mesh2d::QuadMesh& mesh() const { return *mesh_; }
  const Operators1D& ops() const { return mesh_->ops; }
  const euler::GasModel& gas() const { return gas_; }
  const Scheme2D& scheme() const { return scheme_; }
  std::size_t n() const { return mesh_->n(); }
  std::size_t num_dofs() const { return mesh_->size() * mesh_->nodes_per_element(); }

  std::span<const State> element(std::span<const State> u, std::size_t e) const {
    const std::size_t m = mesh_->nodes_per_element();
    return u.subspan(e * m, m);
  }

  /// Phases 1 and 2: projected face states, then one surface flux per face
  /// point shared by both elements.
  void exchange(std::span<const State> u, FaceData& fd) const {
    const std::size_t k = mesh_->size();
    const std::size_t n = this->n();
    fd.inner.resize(k);
    fd.fstar.resize(k);
    for (std::size_t e = 0; e < k; ++e) {
      try {
        fd.inner[e] = project_faces_2d(ops(), element(u, e), scheme_.projection, gas_);
      } catch (const Error& err) {
        throw_with_element(err, e);
      }
      for (auto& f : fd.fstar[e]) f.resize(n);
    }
    for (std::size_t e = 0; e < k; ++e)
      for (int d = 0; d < 2; ++d) {
        const Face fp = plus_face(d), fm = minus_face(d);
        const std::size_t nb = mesh_->neighbor(e, fp);
        const auto& normals = mesh_->elements[e].face_normal[fp];
        for (std::size_t t = 0; t < n; ++t) {
          const Flux f = euler::surface_flux<2>(scheme_.surface_flux, fd.inner[e][fp][t],
                                                fd.inner[nb][fm][t], normals[t], gas_);
          fd.fstar[e][fp][t] = f;
          fd.fstar[nb][fm][t] = f;
        }
      }
  }

  /// Two-point volume flux with metric dealiasing along line t of direction d;
  /// entries n and n+1 denote the minus and plus face states.
  auto pair_flux(std::span<const State> ue, const FaceData& fd, std::size_t e, int d,
                 std::size_t t) const {
    const std::size_t n = this->n();
    const auto& g = mesh_->elements[e];
    const auto& ja = d == 0 ? g.ja1 : g.ja2;
    const Face fm = minus_face(d), fp = plus_face(d);
    return [this, ue, &fd, &g, &ja, e, d, t, n, fm, fp](std::size_t a, std::size_t b) {
      auto state = [&](std::size_t i) -> const State& {
        return i < n ? ue[line_node(d, t, i, n)] : fd.inner[e][i == n ? fm : fp][t];
      };
      auto metric = [&](std::size_t i) -> const Vec2& {
        return i < n ? ja[line_node(d, t, i, n)] : g.face_normal[i == n ? fm : fp][t];
      };
      return euler::two_point_flux<2>(scheme_.volume_flux, state(a), state(b),
                                      0.5 * (metric(a) + metric(b)), gas_);
    };
  }

  /// Phase 3 for one element: telescoping fluxes in both directions with the
  /// closure check.
  void element_fluxes(std::span<const State> u, const FaceData& fd, std::size_t e,
                      ElementFluxes& out) const {
    const std::size_t n = this->n();
    const auto ue = element(u, e);
    for (auto& d : out.dir) d.resize((n + 1) * n);
    for (int d = 0; d < 2; ++d)
      for (std::size_t t = 0; t < n; ++t) {
        std::span<Flux> fbar(out.dir[static_cast<std::size_t>(d)].data() + (n + 1) * t, n + 1);
        ClosureReport rep;
        try {
          rep = telescoping_recurrence<Flux>(ops(), pair_flux(ue, fd, e, d, t),
                                             fd.fstar[e][minus_face(d)][t],
                                             fd.fstar[e][plus_face(d)][t], fbar);
        } catch (const Error& err) {
          throw_with_element(err, e, d, t);
        }
        if (!(rep.residual <= closure_tolerance_2d * rep.scale)) {
          std::ostringstream os;
          os << "telescoping closure residual " << rep.residual << " (scale " << rep.scale
             << ") in element " << e << ", direction " << d + 1 << ", line " << t;
          throw TelescopingClosure(os.str());
        }
      }
  }

  /// Largest relative closure residual over all lines, without throwing.
  double max_closure(std::span<const State> u) const {
    FaceData fd;
    exchange(u, fd);
    const std::size_t n = this->n();
    std::vector<Flux> fbar(n + 1);
    double r = 0.0;
    for (std::size_t e = 0; e < mesh_->size(); ++e)
      for (int d = 0; d < 2; ++d)
        for (std::size_t t = 0; t < n; ++t) {
          const auto rep = telescoping_recurrence<Flux>(
              ops(), pair_flux(element(u, e), fd, e, d, t), fd.fstar[e][minus_face(d)][t],
              fd.fstar[e][plus_face(d)][t], std::span<Flux>(fbar));
          r = std::max(r, rep.relative());
        }
    return r;
  }

  /// Per-node update (J w_i w_j)^{-1} [w_j (fbar_(i) - fbar_(i+1)) + w_i (...)].
  void assemble(const ElementFluxes& fl, std::size_t e, std::span<State> dudt) const {
    const std::size_t n = this->n();
    const auto& w = ops().mass;
    const auto& jac = mesh_->elements[e].jac;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const Flux d1 = fl.at(0, j, i, n) - fl.at(0, j, i + 1, n);
        const Flux d2 = fl.at(1, i, j, n) - fl.at(1, i, j + 1, n);
        dudt[i + n * j] = (1.0 / jac[i + n * j]) * ((1.0 / w[i]) * d1 + (1.0 / w[j]) * d2);
      }
  }

  void rhs(std::span<const State> u, std::span<State> dudt,
           Formulation form = Formulation::Telescoping) const {
    FaceData fd;
    exchange(u, fd);
    const std::size_t m = mesh_->nodes_per_element();
    ElementFluxes fl;
    for (std::size_t e = 0; e < mesh_->size(); ++e) {
      auto out = dudt.subspan(e * m, m);
      if (form == Formulation::Telescoping) {
        element_fluxes(u, fd, e, fl);
        assemble(fl, e, out);
      } else {
        chan_element(u, fd, e, out);
      }
    }
  }

  /// Matrix form applied line by line; reference path for the
  /// telescoping assembly.
  void chan_element(std::span<const State> u, const FaceData& fd, std::size_t e,
                    std::span<State> out) const {
    const std::size_t n = this->n();
    const auto ue = element(u, e);
    const auto& g = mesh_->elements[e];
    const auto& w = ops().mass;
    for (auto& x : out) x = State{};
    for (int d = 0; d < 2; ++d)
      for (std::size_t t = 0; t < n; ++t) {
        const Face fm = minus_face(d), fp = plus_face(d);
        const Flux ftL = euler::physical_flux<2>(fd.inner[e][fm][t], g.face_normal[fm][t], gas_);
        const Flux ftR = euler::physical_flux<2>(fd.inner[e][fp][t], g.face_normal[fp][t], gas_);
        const auto r = chan_flux_divergence<Flux>(ops(), pair_flux(ue, fd, e, d, t), ftL, ftR,
                                                  fd.fstar[e][fm][t], fd.fstar[e][fp][t]);
        for (std::size_t k = 0; k < n; ++k) out[line_node(d, t, k, n)] -= (1.0 / w[k]) * r[k];
      }
    for (std::size_t q = 0; q < n * n; ++q) out[q] *= 1.0 / g.jac[q];
  }

  /// Quadrature of a nodal field over the mesh.
  template <class Fn>
  double integrate(Fn&& g) const {
    return mesh_->integrate(std::forward<Fn>(g));
  }

  /// sum_e sum_ij J w_i w_j u_ij per conserved variable.
  State totals(std::span<const State> u) const {
    const std::size_t n = this->n();
    const auto& w = ops().mass;
    State s{};
    for (std::size_t e = 0; e < mesh_->size(); ++e)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t q = i + n * j;
          s += (mesh_->elements[e].jac[q] * w[i] * w[j]) * u[e * n * n + q];
        }
    return s;
  }

 private:
  [[noreturn]] static void throw_with_element(const Error& err, std::size_t e, int d = -1,
                                              std::size_t t = 0) {
    std::ostringstream os;
    os << err.what() << " [element " << e;
    if (d >= 0) os << ", direction " << d + 1 << ", line " << t;
    os << "]";
    if (auto* up = dynamic_cast<const UnphysicalState*>(&err))
      throw UnphysicalState(os.str(), up->density, up->pressure);
    if (dynamic_cast<const EntropyInversion*>(&err)) throw EntropyInversion(os.str());
    throw Error(os.str());
  }

  const mesh2d::QuadMesh* mesh_;
  euler::GasModel gas_;
  Scheme2D scheme_;
};

}  // namespace fdg::core2d
