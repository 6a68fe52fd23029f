#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fdg/basis.hpp"
#include "fdg/errors.hpp"
#include "fdg/euler.hpp"

namespace fdg {

/// How the inner face states of an element are obtained.
enum class FaceProjection {
  Entropy,       ///< u(Vf v(u)): entropy-projected variables
  Conservative,  ///< Vf u: the standard (non-projected) Gauss scheme
};

inline const char* to_string(FaceProjection p) {
  return p == FaceProjection::Entropy ? "entropy" : "conservative";
}

/// Index convention for pair-flux callables: nodes are 0..N, the left
/// projected face state is N+1 and the right one is N+2.
struct PairIndex {
  std::size_t n;  ///< number of nodes, N+1
  std::size_t left() const { return n; }
  std::size_t right() const { return n + 1; }
};

/// Result of the closure check fbar_{N+1}(recurrence) == f*_R.
struct ClosureReport {
  double residual = 0.0;  ///< max-norm of the mismatch
  double scale = 0.0;     ///< max |two-point flux| over the element
  double relative() const { return scale > 0.0 ? residual / scale : residual; }
};

/// Telescoping flux recurrence on the complementary grid. `pair(a, b)` returns
/// the two-point flux between entries a and b (see PairIndex). On return
/// fbar has N+2 entries with fbar[0] = f*_L and fbar[N+1] = f*_R; the
/// recurrence value for fbar[N+1] is only compared, never used.
template <class Flux, class PairFluxFn>
ClosureReport telescoping_recurrence(const Operators1D& ops, PairFluxFn&& pair, const Flux& fstarL,
                                     const Flux& fstarR, std::span<Flux> fbar) {
  const std::size_t n = ops.size();
  const PairIndex idx{n};
  if (fbar.size() != n + 1) throw ContractViolation("telescoping flux storage must hold N+2");

  double scale = std::max(max_abs(fstarL), max_abs(fstarR));
  // Face-row sums sum_k l_k(-1) F(L~,k) and sum_k l_k(+1) F(R~,k).
  Flux gL{}, gR{};
  for (std::size_t k = 0; k < n; ++k) {
    if (ops.left(k) != 0.0) {
      const Flux f = pair(idx.left(), k);
      scale = std::max(scale, max_abs(f));
      gL += ops.left(k) * f;
    }
    if (ops.right(k) != 0.0) {
      const Flux f = pair(idx.right(), k);
      scale = std::max(scale, max_abs(f));
      gR += ops.right(k) * f;
    }
  }

  fbar[0] = fstarL;
  Flux current = fstarL;
  for (std::size_t i = 0; i < n; ++i) {
    Flux next = current;
    for (std::size_t k = 0; k < n; ++k) {
      if (ops.S(i, k) == 0.0) continue;
      const Flux f = pair(i, k);
      scale = std::max(scale, max_abs(f));
      next += ops.S(i, k) * f;
    }
    if (ops.left(i) != 0.0) next -= ops.left(i) * (pair(i, idx.left()) - gL + fstarL);
    if (ops.right(i) != 0.0) next += ops.right(i) * (pair(i, idx.right()) - gR + fstarR);
    current = next;
    if (i + 1 < n) fbar[i + 1] = next;
  }
  fbar[n] = fstarR;
  return ClosureReport{max_abs(current - fstarR), scale};
}

/// Relative closure tolerance applied inside telescoping_fluxes.
inline constexpr double closure_tolerance_1d = 1e-10;

/// Hybridized matrix form: returns r = [I Vf^T](2Q o F^S) 1 + Vf^T B (f* - f~),
/// so that M u_t = -r. Evaluated literally from the (N+3)x(N+3) block
/// operator 2Q without any telescoping identities. The face rows of 2Q o F^S
/// are lifted with Vf^T alone; the B factor already sits inside 2Q.
template <class Flux, class PairFluxFn>
std::vector<Flux> chan_flux_divergence(const Operators1D& ops, PairFluxFn&& pair,
                                       const Flux& ftildeL, const Flux& ftildeR,
                                       const Flux& fstarL, const Flux& fstarR) {
  const std::size_t n = ops.size();
  const std::size_t m = n + 2;
  // 2Q = [[S, Vf^T B], [-B Vf, B]].
  Matrix q2(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) q2(i, k) = ops.S(i, k);
    q2(i, n) = ops.Vf(0, i) * ops.B[0];
    q2(i, n + 1) = ops.Vf(1, i) * ops.B[1];
  }
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t k = 0; k < n; ++k) q2(n + f, k) = -ops.B[f] * ops.Vf(f, k);
    q2(n + f, n + f) = ops.B[f];
  }

  std::vector<Flux> rowsum(m);
  for (std::size_t a = 0; a < m; ++a) {
    Flux acc{};
    for (std::size_t b = 0; b < m; ++b)
      if (q2(a, b) != 0.0) acc += q2(a, b) * pair(a, b);
    rowsum[a] = acc;
  }

  const Flux jumpL = fstarL - ftildeL;
  const Flux jumpR = fstarR - ftildeR;
  std::vector<Flux> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double bl = ops.Vf(0, i) * ops.B[0];
    const double br = ops.Vf(1, i) * ops.B[1];
    r[i] = rowsum[i] + ops.Vf(0, i) * rowsum[n] + ops.Vf(1, i) * rowsum[n + 1] + bl * jumpL +
           br * jumpR;
  }
  return r;
}

namespace core1d {

using State = euler::ConsState<1>;
using Flux = euler::Flux<1>;

/// One element of a 1D mesh: operators, Jacobian dx/dxi and nodal states.
struct Element1D {
  const Operators1D* ops = nullptr;
  double jac = 1.0;
  std::span<const State> u;
};

struct FaceStates {
  State left;
  State right;
};

/// Inner face states from entropy-projected variables. Lobatto elements
/// return the boundary nodes directly.
inline FaceStates entropy_project_faces(const Element1D& e, const euler::GasModel& gas) {
  const auto& ops = *e.ops;
  const std::size_t n = ops.size();
  if (ops.is_lobatto()) return {e.u[0], e.u[n - 1]};
  euler::EntropyVars<1> vl, vr;
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = euler::cons_to_entropy<1>(e.u[k], gas);
    vl.v += ops.left(k) * v.v;
    vr.v += ops.right(k) * v.v;
  }
  return {euler::entropy_to_cons<1>(vl, gas), euler::entropy_to_cons<1>(vr, gas)};
}

/// Inner face states by direct interpolation of the conservative variables.
inline FaceStates interpolate_faces(const Element1D& e) {
  const auto& ops = *e.ops;
  const std::size_t n = ops.size();
  if (ops.is_lobatto()) return {e.u[0], e.u[n - 1]};
  FaceStates f{};
  for (std::size_t k = 0; k < n; ++k) {
    f.left += ops.left(k) * e.u[k];
    f.right += ops.right(k) * e.u[k];
  }
  return f;
}

inline FaceStates project_faces(const Element1D& e, FaceProjection proj,
                                const euler::GasModel& gas) {
  return proj == FaceProjection::Entropy ? entropy_project_faces(e, gas) : interpolate_faces(e);
}

/// Adapts a symmetric two-point flux f(uL, uR) to the pair-index form.
template <class VolumeFluxFn>
auto make_pair_flux(const Element1D& e, const FaceStates& faces, VolumeFluxFn& vflux) {
  const std::size_t n = e.u.size();
  return [&e, &faces, &vflux, n](std::size_t a, std::size_t b) {
    auto state = [&](std::size_t i) -> const State& {
      return i < n ? e.u[i] : (i == n ? faces.left : faces.right);
    };
    return vflux(state(a), state(b));
  };
}

/// Reference-space flux divergence: returns the per-node time derivative of
/// Matrix-form scheme, u_t = -M^{-1} r with M = diag(J w).
template <class VolumeFluxFn>
std::vector<State> chan_rhs(const Element1D& e, const FaceStates& faces, const Flux& fstarL,
                            const Flux& fstarR, VolumeFluxFn&& vflux,
                            const euler::GasModel& gas) {
  const auto& ops = *e.ops;
  const Vector<1> unit{{1.0}};
  const Flux ftL = euler::physical_flux<1>(faces.left, unit, gas);
  const Flux ftR = euler::physical_flux<1>(faces.right, unit, gas);
  auto r = chan_flux_divergence<Flux>(ops, make_pair_flux(e, faces, vflux), ftL, ftR, fstarL,
                                      fstarR);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= -1.0 / (e.jac * ops.mass[i]);
  return r;
}

/// Telescoping fluxes with the closure check. fbar[0] = f*_L and
/// fbar[N+1] = f*_R once the check passes.
template <class VolumeFluxFn>
std::vector<Flux> telescoping_fluxes(const Element1D& e, const FaceStates& faces,
                                     const Flux& fstarL, const Flux& fstarR,
                                     VolumeFluxFn&& vflux) {
  std::vector<Flux> fbar(e.u.size() + 1);
  const auto report = telescoping_recurrence<Flux>(*e.ops, make_pair_flux(e, faces, vflux),
                                                   fstarL, fstarR, std::span<Flux>(fbar));
  if (report.residual > closure_tolerance_1d * report.scale)
    throw TelescopingClosure("telescoping closure residual " + std::to_string(report.residual) +
                             " exceeds tolerance (scale " + std::to_string(report.scale) + ")");
  return fbar;
}

/// Closure diagnostic: |fbar_{N+1}(recurrence) - f*_R| without throwing.
template <class VolumeFluxFn>
ClosureReport verify_closure(const Element1D& e, const FaceStates& faces, const Flux& fstarL,
                             const Flux& fstarR, VolumeFluxFn&& vflux) {
  std::vector<Flux> fbar(e.u.size() + 1);
  return telescoping_recurrence<Flux>(*e.ops, make_pair_flux(e, faces, vflux), fstarL, fstarR,
                                      std::span<Flux>(fbar));
}

/// Finite-volume form: (u_t)_i = (fbar_i - fbar_{i+1}) / (J w_i).
inline std::vector<State> fv_rhs(std::span<const Flux> fbar, const Element1D& e) {
  const auto& ops = *e.ops;
  const std::size_t n = ops.size();
  if (fbar.size() != n + 1) throw ContractViolation("fv_rhs expects N+2 telescoping fluxes");
  std::vector<State> dudt(n);
  for (std::size_t i = 0; i < n; ++i) dudt[i] = (1.0 / (e.jac * ops.mass[i])) * (fbar[i] - fbar[i + 1]);
  return dudt;
}

/// Periodic uniform 1D mesh.
struct Mesh1D {
  double x0 = -1.0;
  double x1 = 1.0;
  std::size_t elements = 1;

  double h() const { return (x1 - x0) / static_cast<double>(elements); }
  double jacobian() const { return 0.5 * h(); }
  double node_x(std::size_t e, double xi) const {
    return x0 + h() * (static_cast<double>(e) + 0.5 * (xi + 1.0));
  }
};

enum class Formulation { Chan, Telescoping };

struct Scheme1D {
  euler::TwoPointFlux volume_flux = euler::TwoPointFlux::Chandrashekar;
  euler::SurfaceFlux surface_flux{};
  FaceProjection projection = FaceProjection::Entropy;
};

/// Periodic 1D DGSEM discretization; the global state is element-major,
/// K*(N+1) nodal values.
class Dgsem1D {
 public:
  Dgsem1D(Mesh1D mesh, const QuadratureRule& rule, euler::GasModel gas, Scheme1D scheme)
      : mesh_(mesh), ops_(build_operators(rule)), gas_(gas), scheme_(scheme) {
    if (mesh_.elements < 1 || !(mesh_.x1 > mesh_.x0)) throw InvalidMesh("degenerate 1D mesh");
  }

  const Mesh1D& mesh() const { return mesh_; }
  const Operators1D& ops() const { return ops_; }
  const euler::GasModel& gas() const { return gas_; }
  const Scheme1D& scheme() const { return scheme_; }
  std::size_t nodes_per_element() const { return ops_.size(); }
  std::size_t num_dofs() const { return mesh_.elements * ops_.size(); }

  Element1D element(std::span<const State> u, std::size_t e) const {
    const std::size_t n = ops_.size();
    return Element1D{&ops_, mesh_.jacobian(), u.subspan(e * n, n)};
  }

  double node_x(std::size_t e, std::size_t i) const { return mesh_.node_x(e, ops_.rule.nodes[i]); }

  /// Face states per element and the interface fluxes; flux k sits between
  /// element k-1 (right face) and element k (left face), periodically.
  void exchange(std::span<const State> u, std::vector<FaceStates>& faces,
                std::vector<Flux>& fstar) const {
    const std::size_t k = mesh_.elements;
    faces.resize(k);
    fstar.resize(k);
    for (std::size_t e = 0; e < k; ++e)
      faces[e] = project_faces(element(u, e), scheme_.projection, gas_);
    const Vector<1> unit{{1.0}};
    for (std::size_t e = 0; e < k; ++e) {
      const auto& left = faces[(e + k - 1) % k];
      fstar[e] = euler::surface_flux<1>(scheme_.surface_flux, left.right, faces[e].left, unit, gas_);
    }
  }

  auto volume_flux_fn() const {
    return [this](const State& a, const State& b) {
      return euler::two_point_flux<1>(scheme_.volume_flux, a, b, Vector<1>{{1.0}}, gas_);
    };
  }

  void rhs(std::span<const State> u, std::span<State> dudt, Formulation form) const {
    std::vector<FaceStates> faces;
    std::vector<Flux> fstar;
    exchange(u, faces, fstar);
    const std::size_t k = mesh_.elements;
    const std::size_t n = ops_.size();
    auto vflux = volume_flux_fn();
    for (std::size_t e = 0; e < k; ++e) {
      const auto el = element(u, e);
      const Flux& fL = fstar[e];
      const Flux& fR = fstar[(e + 1) % k];
      std::vector<State> local;
      if (form == Formulation::Chan) {
        local = chan_rhs(el, faces[e], fL, fR, vflux, gas_);
      } else {
        const auto fbar = telescoping_fluxes(el, faces[e], fL, fR, vflux);
        local = fv_rhs(fbar, el);
      }
      std::copy(local.begin(), local.end(), dudt.begin() + static_cast<std::ptrdiff_t>(e * n));
    }
  }

  /// Quadrature of a nodal field: sum_e sum_i J w_i g(e, i).
  template <class Fn>
  double integrate(Fn&& g) const {
    double s = 0.0;
    for (std::size_t e = 0; e < mesh_.elements; ++e)
      for (std::size_t i = 0; i < ops_.size(); ++i)
        s += mesh_.jacobian() * ops_.mass[i] * g(e, i);
    return s;
  }

 private:
  Mesh1D mesh_;
  Operators1D ops_;
  euler::GasModel gas_;
  Scheme1D scheme_;
};

}  // namespace core1d
}  // namespace fdg
