#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <string>

#include "fdg/errors.hpp"
#include "fdg/svec.hpp"

namespace fdg::euler {

/// Conservative variables (rho, rho*v..., rho*E) in Dim space dimensions.
template <int Dim>
using ConsState = SVec<static_cast<std::size_t>(Dim + 2)>;

/// Flux vectors live in the same space as conservative states.
template <int Dim>
using Flux = ConsState<Dim>;

template <int Dim>
struct PrimState {
  double rho = 1.0;
  Vector<Dim> vel{};
  double p = 1.0;
};

template <int Dim>
struct EntropyVars {
  SVec<static_cast<std::size_t>(Dim + 2)> v{};
};

struct GasModel {
  double gamma = 1.4;

  GasModel() = default;
  explicit GasModel(double g) : gamma(g) {
    if (!(g > 1.0)) throw ContractViolation("gamma must exceed 1");
  }
};

namespace detail {

template <int Dim>
[[noreturn]] void throw_unphysical(const char* where, double rho, double p) {
  std::ostringstream os;
  os << where << ": unphysical state (rho = " << rho << ", p = " << p << ")";
  throw UnphysicalState(os.str(), rho, p);
}

}  // namespace detail

template <int Dim>
Vector<Dim> velocity(const ConsState<Dim>& u) {
  Vector<Dim> v;
  for (int d = 0; d < Dim; ++d) v[d] = u[d + 1] / u[0];
  return v;
}

/// Pressure without admissibility checks.
template <int Dim>
double pressure(const ConsState<Dim>& u, const GasModel& gas) {
  double m2 = 0.0;
  for (int d = 0; d < Dim; ++d) m2 += u[d + 1] * u[d + 1];
  return (gas.gamma - 1.0) * (u[Dim + 1] - 0.5 * m2 / u[0]);
}

template <int Dim>
bool is_physical(const ConsState<Dim>& u, const GasModel& gas) {
  return u[0] > 0.0 && std::isfinite(u[0]) && pressure<Dim>(u, gas) > 0.0 &&
         std::isfinite(u[Dim + 1]);
}

template <int Dim>
PrimState<Dim> cons_to_prim(const ConsState<Dim>& u, const GasModel& gas) {
  if (!(u[0] > 0.0)) detail::throw_unphysical<Dim>("cons_to_prim", u[0], NAN);
  PrimState<Dim> w;
  w.rho = u[0];
  w.vel = velocity<Dim>(u);
  w.p = pressure<Dim>(u, gas);
  if (!(w.p > 0.0)) detail::throw_unphysical<Dim>("cons_to_prim", w.rho, w.p);
  return w;
}

template <int Dim>
ConsState<Dim> prim_to_cons(const PrimState<Dim>& w, const GasModel& gas) {
  if (!(w.rho > 0.0) || !(w.p > 0.0)) detail::throw_unphysical<Dim>("prim_to_cons", w.rho, w.p);
  ConsState<Dim> u;
  u[0] = w.rho;
  for (int d = 0; d < Dim; ++d) u[d + 1] = w.rho * w.vel[d];
  u[Dim + 1] = w.p / (gas.gamma - 1.0) + 0.5 * w.rho * dot(w.vel, w.vel);
  return u;
}

template <int Dim>
double sound_speed(const PrimState<Dim>& w, const GasModel& gas) {
  return std::sqrt(gas.gamma * w.p / w.rho);
}

/// Physical entropy s = ln(p rho^-gamma).
template <int Dim>
double specific_entropy(const PrimState<Dim>& w, const GasModel& gas) {
  return std::log(w.p) - gas.gamma * std::log(w.rho);
}

/// Mathematical entropy S(u) = -rho s / (gamma - 1).
template <int Dim>
double entropy(const ConsState<Dim>& u, const GasModel& gas) {
  const auto w = cons_to_prim<Dim>(u, gas);
  return -w.rho * specific_entropy<Dim>(w, gas) / (gas.gamma - 1.0);
}

/// Entropy flux psi = rho v.n paired with S above.
template <int Dim>
double entropy_potential(const ConsState<Dim>& u, const Vector<Dim>& n) {
  double s = 0.0;
  for (int d = 0; d < Dim; ++d) s += u[d + 1] * n[d];
  return s;
}

template <int Dim>
EntropyVars<Dim> cons_to_entropy(const ConsState<Dim>& u, const GasModel& gas) {
  const auto w = cons_to_prim<Dim>(u, gas);
  const double g = gas.gamma;
  const double beta = w.rho / (2.0 * w.p);
  const double s = specific_entropy<Dim>(w, gas);
  EntropyVars<Dim> e;
  e.v[0] = (g - s) / (g - 1.0) - beta * dot(w.vel, w.vel);
  for (int d = 0; d < Dim; ++d) e.v[d + 1] = 2.0 * beta * w.vel[d];
  e.v[Dim + 1] = -2.0 * beta;
  return e;
}

template <int Dim>
ConsState<Dim> entropy_to_cons(const EntropyVars<Dim>& e, const GasModel& gas) {
  const double g = gas.gamma;
  const double last = e.v[Dim + 1];
  if (!(last < 0.0) || !std::isfinite(last))
    throw EntropyInversion("entropy variables inadmissible: last component = " +
                           std::to_string(last));
  const double beta = -0.5 * last;
  PrimState<Dim> w;
  for (int d = 0; d < Dim; ++d) w.vel[d] = e.v[d + 1] / (2.0 * beta);
  const double s = g - (g - 1.0) * (e.v[0] + beta * dot(w.vel, w.vel));
  w.rho = std::exp((s + std::log(2.0 * beta)) / (1.0 - g));
  w.p = w.rho / (2.0 * beta);
  if (!(w.rho > 0.0) || !(w.p > 0.0) || !std::isfinite(w.rho) || !std::isfinite(w.p))
    throw EntropyInversion("entropy variables map to an unphysical state");
  return prim_to_cons<Dim>(w, gas);
}

/// f(u).n for an arbitrary (not necessarily unit) direction n.
template <int Dim>
Flux<Dim> physical_flux(const ConsState<Dim>& u, const Vector<Dim>& n, const GasModel& gas) {
  const auto w = cons_to_prim<Dim>(u, gas);
  const double vn = dot(w.vel, n);
  Flux<Dim> f;
  f[0] = u[0] * vn;
  for (int d = 0; d < Dim; ++d) f[d + 1] = u[d + 1] * vn + w.p * n[d];
  f[Dim + 1] = (u[Dim + 1] + w.p) * vn;
  return f;
}

/// Logarithmic mean (b - a) / (ln b - ln a), series branch near a = b.
inline double log_mean(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log_mean requires positive arguments");
  // Ordered arguments make the result bitwise symmetric.
  if (a > b) std::swap(a, b);
  // Expansion in xi = b/a: with f = (xi-1)/(xi+1),
  // ln(xi) = 2 f (1 + u/3 + u^2/5 + u^3/7 + ...), u = f^2.
  const double f = (b - a) / (a + b);
  const double u = f * f;
  if (f < 1e-4) {
    const double series = 1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0;
    return 0.5 * (a + b) / series;
  }
  return (b - a) / std::log1p((b - a) / a);
}

/// Chandrashekar's kinetic-energy-preserving and entropy-conservative flux.
template <int Dim>
Flux<Dim> chandrashekar_flux(const ConsState<Dim>& uL, const ConsState<Dim>& uR,
                             const Vector<Dim>& n, const GasModel& gas) {
  const auto wL = cons_to_prim<Dim>(uL, gas);
  const auto wR = cons_to_prim<Dim>(uR, gas);
  const double betaL = 0.5 * wL.rho / wL.p;
  const double betaR = 0.5 * wR.rho / wR.p;
  const double rho_ln = log_mean(wL.rho, wR.rho);
  const double beta_ln = log_mean(betaL, betaR);
  const double rho_avg = 0.5 * (wL.rho + wR.rho);
  const double beta_avg = 0.5 * (betaL + betaR);
  const double p_hat = 0.5 * rho_avg / beta_avg;
  const Vector<Dim> v_avg = 0.5 * (wL.vel + wR.vel);
  const double v2_avg = 0.5 * (dot(wL.vel, wL.vel) + dot(wR.vel, wR.vel));

  Flux<Dim> f;
  f[0] = rho_ln * dot(v_avg, n);
  double mv = 0.0;
  for (int d = 0; d < Dim; ++d) {
    f[d + 1] = f[0] * v_avg[d] + p_hat * n[d];
    mv += f[d + 1] * v_avg[d];
  }
  f[Dim + 1] = f[0] * (0.5 / ((gas.gamma - 1.0) * beta_ln) - 0.5 * v2_avg) + mv;
  return f;
}

/// Central flux: arithmetic mean of the physical fluxes.
template <int Dim>
Flux<Dim> average_flux(const ConsState<Dim>& uL, const ConsState<Dim>& uR, const Vector<Dim>& n,
                       const GasModel& gas) {
  return 0.5 * (physical_flux<Dim>(uL, n, gas) + physical_flux<Dim>(uR, n, gas));
}

/// Largest signal speed |v.n| + c |n| over the two states.
template <int Dim>
double max_wavespeed(const ConsState<Dim>& uL, const ConsState<Dim>& uR, const Vector<Dim>& n,
                     const GasModel& gas) {
  const auto wL = cons_to_prim<Dim>(uL, gas);
  const auto wR = cons_to_prim<Dim>(uR, gas);
  const double nn = norm<Dim>(n);
  return std::max(std::abs(dot(wL.vel, n)) + sound_speed<Dim>(wL, gas) * nn,
                  std::abs(dot(wR.vel, n)) + sound_speed<Dim>(wR, gas) * nn);
}

/// Local Lax-Friedrichs (Rusanov) flux.
template <int Dim>
Flux<Dim> llf_flux(const ConsState<Dim>& uL, const ConsState<Dim>& uR, const Vector<Dim>& n,
                   const GasModel& gas) {
  const double lambda = max_wavespeed<Dim>(uL, uR, n, gas);
  return average_flux<Dim>(uL, uR, n, gas) - (0.5 * lambda) * (uR - uL);
}

/// Symmetric two-point fluxes available for volume terms.
enum class TwoPointFlux { Chandrashekar, Average };

inline const char* to_string(TwoPointFlux f) {
  return f == TwoPointFlux::Chandrashekar ? "chandrashekar" : "average";
}

template <int Dim>
Flux<Dim> two_point_flux(TwoPointFlux kind, const ConsState<Dim>& uL, const ConsState<Dim>& uR,
                         const Vector<Dim>& n, const GasModel& gas) {
  return kind == TwoPointFlux::Chandrashekar ? chandrashekar_flux<Dim>(uL, uR, n, gas)
                                             : average_flux<Dim>(uL, uR, n, gas);
}

/// Interface flux: a symmetric central part plus optional Lax-Friedrichs
/// dissipation -lambda/2 (uR - uL).
struct SurfaceFlux {
  TwoPointFlux central = TwoPointFlux::Chandrashekar;
  bool dissipative = true;
};

template <int Dim>
Flux<Dim> surface_flux(const SurfaceFlux& sf, const ConsState<Dim>& uL, const ConsState<Dim>& uR,
                       const Vector<Dim>& n, const GasModel& gas) {
  auto f = two_point_flux<Dim>(sf.central, uL, uR, n, gas);
  if (sf.dissipative) f -= (0.5 * max_wavespeed<Dim>(uL, uR, n, gas)) * (uR - uL);
  return f;
}

/// Lax-Friedrichs intermediate state between ui and uj. The direction n
/// points from i towards j and need not be normalized; the wave speed is
/// evaluated with the unit normal.
template <int Dim>
ConsState<Dim> bar_state(const ConsState<Dim>& ui, const ConsState<Dim>& uj, const Vector<Dim>& n,
                         const GasModel& gas) {
  const double nn = norm<Dim>(n);
  if (!(nn > 0.0)) throw DegenerateBarState("bar state requires a nonzero normal");
  const Vector<Dim> nhat = (1.0 / nn) * n;
  const double lambda = max_wavespeed<Dim>(ui, uj, nhat, gas);
  const auto df = physical_flux<Dim>(uj, nhat, gas) - physical_flux<Dim>(ui, nhat, gas);
  if (!(lambda > 0.0)) {
    if (max_abs(df) == 0.0) return 0.5 * (ui + uj);
    throw DegenerateBarState("zero wave speed with a nonzero flux jump");
  }
  return 0.5 * (ui + uj) - (0.5 / lambda) * df;
}

}  // namespace fdg::euler
