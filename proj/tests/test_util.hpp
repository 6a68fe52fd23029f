#pragma once

#include <random>

#include "fdg/euler.hpp"

namespace fdg::test_util {

/// Random admissible state with rho, p in [lo, hi] and |v_d| <= vmax.
template <int Dim>
euler::ConsState<Dim> random_state(std::mt19937_64& rng, const euler::GasModel& gas,
                                   double lo = 0.1, double hi = 10.0, double vmax = 3.0) {
  std::uniform_real_distribution<double> pos(lo, hi);
  std::uniform_real_distribution<double> vel(-vmax, vmax);
  euler::PrimState<Dim> w;
  w.rho = pos(rng);
  w.p = pos(rng);
  for (int d = 0; d < Dim; ++d) w.vel[d] = vel(rng);
  if constexpr (Dim == 2) {
    // Keep |v| <= vmax.
    const double s = norm<Dim>(w.vel);
    if (s > vmax) w.vel = (vmax / s) * w.vel;
  }
  return euler::prim_to_cons<Dim>(w, gas);
}

}  // namespace fdg::test_util
