#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fdg/errors.hpp"

namespace fdg::tint {

/// 2N-storage explicit Runge-Kutta scheme in Williamson form:
///   du = a_s du + dt L(u, t + c_s dt);  u = u + b_s du.
struct RkScheme {
  std::string name;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  std::size_t stages() const { return a.size(); }
};

/// Five-stage fourth-order low-storage scheme (2N storage).
inline RkScheme low_storage_rk45() {
  return RkScheme{
      "lsrk4(5)-2n",
      {0.0, -567301805773.0 / 1357537059087.0, -2404267990393.0 / 2016746695238.0,
       -3550918686646.0 / 2091501179385.0, -1275806237668.0 / 842570457699.0},
      {1432997174477.0 / 9575080441755.0, 5161836677717.0 / 13612068292357.0,
       1720146321549.0 / 2090206949498.0, 3134564353537.0 / 4481467310338.0,
       2277821191437.0 / 14882151754819.0},
      {0.0, 1432997174477.0 / 9575080441755.0, 2526269341429.0 / 6820363962896.0,
       2006345519317.0 / 3224310063776.0, 2802321613138.0 / 2924317926251.0}};
}

enum class TimestepMode { FixedCflAdvective, Idp };

inline const char* to_string(TimestepMode m) {
  return m == TimestepMode::Idp ? "idp" : "fixed_cfl_advective";
}

/// Passed to the per-stage hook before each right-hand side evaluation.
struct StageInfo {
  std::size_t stage;
  double t;   ///< stage time t + c_s dt
  double dt;  ///< size of the step being taken
};

/// Default hook / admissibility callables.
struct NoHook {
  template <class... Args>
  void operator()(Args&&...) const {}
};
struct AlwaysAdmissible {
  template <class U>
  bool operator()(const U&) const {
    return true;
  }
};

/// One low-storage step from `u` at time t. `rhs(u, t, dudt)` fills dudt;
/// `hook(StageInfo, u)` runs before every right-hand side evaluation;
/// `admissible(u)` is checked after every stage. The input is not modified.
template <class T, class Rhs, class Hook = NoHook, class Admissible = AlwaysAdmissible>
std::vector<T> rk_step(const std::vector<T>& u, double t, double dt, const RkScheme& scheme,
                       Rhs&& rhs, Hook&& hook = {}, Admissible&& admissible = {}) {
  if (!(dt > 0.0)) throw ContractViolation("time step must be positive");
  std::vector<T> state = u;
  std::vector<T> acc(u.size(), T{});
  std::vector<T> k(u.size(), T{});
  for (std::size_t s = 0; s < scheme.stages(); ++s) {
    const double ts = t + scheme.c[s] * dt;
    hook(StageInfo{s, ts, dt}, state);
    rhs(state, ts, k);
    for (std::size_t i = 0; i < state.size(); ++i) {
      acc[i] = scheme.a[s] * acc[i] + dt * k[i];
      state[i] = state[i] + scheme.b[s] * acc[i];
    }
    if (!admissible(state))
      throw StepFailure("inadmissible state after stage " + std::to_string(s), static_cast<int>(s));
  }
  return state;
}

struct AdvanceResult {
  std::size_t steps = 0;
  double t = 0.0;
  bool completed = false;
  std::size_t retries = 0;
  std::string failure;
};

/// Integrates from t0 to t_end. `dt_of(u, t)` proposes the step size; the
/// last step is clipped onto t_end. A failed step is retried with half the
/// step up to `max_retries` times; after that the run stops and `u` holds the
/// last valid state. `observer(step, t, dt, u)` runs after each accepted step.
template <class T, class DtFn, class Rhs, class Hook = NoHook, class Admissible = AlwaysAdmissible,
          class Observer = NoHook>
AdvanceResult advance(std::vector<T>& u, double t0, double t_end, const RkScheme& scheme,
                      DtFn&& dt_of, Rhs&& rhs, Hook&& hook = {}, Admissible&& admissible = {},
                      Observer&& observer = {}, int max_retries = 5) {
  AdvanceResult res;
  res.t = t0;
  if (t_end < t0) throw ContractViolation("t_end precedes t0");
  const double eps = 1e-14 * std::max(1.0, std::abs(t_end));
  while (t_end - res.t > eps) {
    double dt = dt_of(u, res.t);
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      res.failure = "nonpositive time step proposed at t = " + std::to_string(res.t);
      return res;
    }
    int attempt = 0;
    for (;;) {
      const double step = std::min(dt, t_end - res.t);
      try {
        auto next = rk_step(u, res.t, step, scheme, rhs, hook, admissible);
        u = std::move(next);
        res.t = (step == t_end - res.t) ? t_end : res.t + step;
        ++res.steps;
        observer(res.steps, res.t, step, u);
        break;
      } catch (const Error& e) {
        if (++attempt > max_retries) {
          res.failure = e.what();
          return res;
        }
        ++res.retries;
        dt = 0.5 * step;
      }
    }
  }
  res.t = t_end;
  res.completed = true;
  return res;
}

}  // namespace fdg::tint
