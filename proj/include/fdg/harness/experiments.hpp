#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fdg/core1d.hpp"
#include "fdg/core2d.hpp"
#include "fdg/errors.hpp"
#include "fdg/euler.hpp"
#include "fdg/harness/config.hpp"
#include "fdg/harness/output.hpp"
#include "fdg/limiter.hpp"
#include "fdg/mesh2d.hpp"
#include "fdg/tint.hpp"

namespace fdg::harness {

using State1 = euler::ConsState<1>;
using State2 = euler::ConsState<2>;

inline std::string output_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output) / name).string();
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw OutputError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw OutputError("write failed: " + path);
}

// manufactured solutions

inline State1 advected_density_1d(double x, double t, const euler::GasModel& gas) {
  const double rho = 2.0 + std::sin(std::numbers::pi * (x - t));
  return euler::prim_to_cons<1>({rho, Vector<1>{{1.0}}, 1.0}, gas);
}

inline State2 advected_density_2d(double x, double y, double t, const euler::GasModel& gas) {
  const double rho = 2.0 + std::sin(std::numbers::pi * (x + y - 2.0 * t));
  return euler::prim_to_cons<2>({rho, Vector<2>{{1.0, 1.0}}, 1.0}, gas);
}

template <int Dim>
void require_physical(std::span<const euler::ConsState<Dim>> u, const euler::GasModel& gas,
                      const std::string& where) {
  for (std::size_t q = 0; q < u.size(); ++q)
    if (!euler::is_physical<Dim>(u[q], gas)) {
      const double rho = u[q][0];
      const double p = euler::pressure<Dim>(u[q], gas);
      throw UnphysicalState(where + ": unphysical state at node " + std::to_string(q), rho, p);
    }
}

// 1D helpers

inline core1d::Scheme1D scheme_1d(const RunConfig& c) {
  return core1d::Scheme1D{c.volume_flux, c.surface_flux(), c.projection};
}

inline std::vector<State1> sample_1d(const core1d::Dgsem1D& dg, double t) {
  std::vector<State1> u(dg.num_dofs());
  const std::size_t n = dg.nodes_per_element();
  for (std::size_t e = 0; e < dg.mesh().elements; ++e)
    for (std::size_t i = 0; i < n; ++i)
      u[e * n + i] = advected_density_1d(dg.node_x(e, i), t, dg.gas());
  return u;
}

/// dt = cfl J min(w) / max(|v| + c).
inline double advective_dt_1d(const core1d::Dgsem1D& dg, std::span<const State1> u, double cfl) {
  double lam = 0.0;
  for (const auto& s : u) lam = std::max(lam, euler::max_wavespeed<1>(s, s, Vector<1>{{1.0}}, dg.gas()));
  const auto& w = dg.ops().mass;
  return cfl * dg.mesh().jacobian() * *std::min_element(w.begin(), w.end()) / lam;
}

/// Quadrature L2 norms of a 1D difference: density, momentum, energy.
inline std::array<double, 3> l2_norms_1d(const core1d::Dgsem1D& dg, std::span<const State1> a,
                                         std::span<const State1> b) {
  const std::size_t n = dg.nodes_per_element();
  std::array<double, 3> r{};
  for (std::size_t v = 0; v < 3; ++v)
    r[v] = std::sqrt(dg.integrate([&](std::size_t e, std::size_t i) {
      const double d = a[e * n + i][v] - b[e * n + i][v];
      return d * d;
    }));
  return r;
}

// equivalence

struct EquivalenceResult {
  ErrorTable table;
  double max_difference = 0.0;  ///< largest L2 difference over all variables and levels
  std::size_t total_steps = 0;
};

/// Integrates the manufactured solution with the Chan and telescoping
/// right-hand sides from identical data, one shared step sequence.
inline EquivalenceResult run_equivalence(const RunConfig& c) {
  EquivalenceResult res;
  res.table.quantity = "difference";
  const auto gas = c.gas();
  const auto rk = tint::low_storage_rk45();
  for (int deg : c.degrees)
    for (std::size_t k : c.elements) {
      core1d::Dgsem1D dg(core1d::Mesh1D{-1.0, 1.0, k}, make_rule(c.nodes, deg), gas, scheme_1d(c));
      auto uc = sample_1d(dg, 0.0);
      auto ut = uc;
      auto rhs = [&](core1d::Formulation form) {
        return [&dg, form](const std::vector<State1>& u, double, std::vector<State1>& dudt) {
          dg.rhs(u, dudt, form);
        };
      };
      double t = 0.0;
      const double eps = 1e-14 * std::max(1.0, c.t_end);
      const std::string where =
          "equivalence N=" + std::to_string(deg) + " K=" + std::to_string(k);
      while (c.t_end - t > eps) {
        const double dt = std::min(advective_dt_1d(dg, uc, c.cfl), c.t_end - t);
        uc = tint::rk_step(uc, t, dt, rk, rhs(core1d::Formulation::Chan));
        ut = tint::rk_step(ut, t, dt, rk, rhs(core1d::Formulation::Telescoping));
        t += dt;
        ++res.total_steps;
        require_physical<1>(uc, gas, where + " (chan) t=" + std::to_string(t));
        require_physical<1>(ut, gas, where + " (telescoping) t=" + std::to_string(t));
      }
      const auto d = l2_norms_1d(dg, uc, ut);
      res.table.rows.push_back({deg, k, 2.0 / static_cast<double>(k), d[0], d[1], d[2], {}});
      res.max_difference = std::max({res.max_difference, d[0], d[1], d[2]});
    }
  compute_slopes(res.table);
  return res;
}

// convergence

struct ConvergenceResult {
  ErrorTable table;
  std::vector<std::pair<int, std::optional<double>>> fitted;  ///< least-squares density slope per N
  std::size_t total_steps = 0;

  std::optional<double> slope(int degree) const {
    for (const auto& [d, s] : fitted)
      if (d == degree) return s;
    return std::nullopt;
  }
};

inline ConvergenceResult run_convergence1d(const RunConfig& c) {
  ConvergenceResult res;
  res.table.quantity = "error";
  const auto gas = c.gas();
  const auto rk = tint::low_storage_rk45();
  for (int deg : c.degrees) {
    for (std::size_t k : c.elements) {
      core1d::Dgsem1D dg(core1d::Mesh1D{-1.0, 1.0, k}, make_rule(c.nodes, deg), gas, scheme_1d(c));
      auto u = sample_1d(dg, 0.0);
      const std::string where =
          "convergence1d N=" + std::to_string(deg) + " K=" + std::to_string(k);
      const auto adv = tint::advance(
          u, 0.0, c.t_end, rk,
          [&](const std::vector<State1>& s, double) { return advective_dt_1d(dg, s, c.cfl); },
          [&](const std::vector<State1>& s, double, std::vector<State1>& dudt) {
            dg.rhs(s, dudt, core1d::Formulation::Telescoping);
          },
          tint::NoHook{},
          [&](const std::vector<State1>& s) {
            return std::all_of(s.begin(), s.end(),
                               [&](const State1& x) { return euler::is_physical<1>(x, gas); });
          });
      if (!adv.completed) throw StepFailure(where + ": " + adv.failure, -1);
      res.total_steps += adv.steps;
      const auto d = l2_norms_1d(dg, u, sample_1d(dg, c.t_end));
      res.table.rows.push_back({deg, k, 2.0 / static_cast<double>(k), d[0], d[1], d[2], {}});
    }
    res.fitted.emplace_back(deg, fitted_slope(res.table, deg));
  }
  compute_slopes(res.table);
  return res;
}

// 2D helpers

inline core2d::Scheme2D scheme_2d(const RunConfig& c) {
  return core2d::Scheme2D{c.volume_flux, c.surface_flux(), c.projection};
}

inline mesh2d::QuadMesh mesh_2d(const RunConfig& c, int degree, std::size_t k) {
  const auto rule = make_rule(c.nodes, degree);
  return c.warp_amplitude == 0.0 ? mesh2d::build_cartesian_mesh(k, k, mesh2d::Rect{}, rule)
                                  : mesh2d::build_warped_mesh(k, k, mesh2d::Rect{}, rule,
                                                              c.warp_amplitude);
}

template <class Fn>
std::vector<State2> sample_2d(const mesh2d::QuadMesh& mesh, Fn&& f) {
  const std::size_t m = mesh.nodes_per_element();
  std::vector<State2> u(mesh.size() * m);
  for (std::size_t e = 0; e < mesh.size(); ++e)
    for (std::size_t q = 0; q < m; ++q) u[e * m + q] = f(mesh.elements[e].x[q]);
  return u;
}

/// dt = cfl min_q J_q min(w) / (lambda(Ja^1) + lambda(Ja^2)).
inline double advective_dt_2d(const core2d::Dgsem2D& dg, std::span<const State2> u, double cfl) {
  const auto& mesh = dg.mesh();
  const std::size_t m = mesh.nodes_per_element();
  const auto& w = dg.ops().mass;
  const double wmin = *std::min_element(w.begin(), w.end());
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.size(); ++e)
    for (std::size_t q = 0; q < m; ++q) {
      const auto& g = mesh.elements[e];
      const auto& s = u[e * m + q];
      const double lam = euler::max_wavespeed<2>(s, s, g.ja1[q], dg.gas()) +
                         euler::max_wavespeed<2>(s, s, g.ja2[q], dg.gas());
      dt = std::min(dt, g.jac[q] * wmin / lam);
    }
  return cfl * dt;
}

inline std::array<double, 3> l2_norms_2d(const mesh2d::QuadMesh& mesh, std::span<const State2> a,
                                         std::span<const State2> b) {
  const std::size_t n = mesh.n();
  auto sq = [&](auto&& pick) {
    return std::sqrt(mesh.integrate([&](std::size_t e, std::size_t i, std::size_t j) {
      const std::size_t g = e * n * n + i + n * j;
      return pick(a[g] - b[g]);
    }));
  };
  return {sq([](const State2& d) { return d[0] * d[0]; }),
          sq([](const State2& d) { return d[1] * d[1] + d[2] * d[2]; }),
          sq([](const State2& d) { return d[3] * d[3]; })};
}

inline ConvergenceResult run_convergence2d(const RunConfig& c) {
  ConvergenceResult res;
  res.table.quantity = "error";
  const auto gas = c.gas();
  const auto rk = tint::low_storage_rk45();
  for (int deg : c.degrees) {
    for (std::size_t k : c.elements) {
      const auto mesh = mesh_2d(c, deg, k);
      core2d::Dgsem2D dg(mesh, gas, scheme_2d(c));
      auto exact = [&](double t) {
        return sample_2d(mesh, [&](const mesh2d::Vec2& x) {
          return advected_density_2d(x[0], x[1], t, gas);
        });
      };
      auto u = exact(0.0);
      const std::string where =
          "convergence2d N=" + std::to_string(deg) + " K=" + std::to_string(k);
      const auto adv = tint::advance(
          u, 0.0, c.t_end, rk,
          [&](const std::vector<State2>& s, double) { return advective_dt_2d(dg, s, c.cfl); },
          [&](const std::vector<State2>& s, double, std::vector<State2>& dudt) { dg.rhs(s, dudt); },
          tint::NoHook{},
          [&](const std::vector<State2>& s) {
            return std::all_of(s.begin(), s.end(),
                               [&](const State2& x) { return euler::is_physical<2>(x, gas); });
          });
      if (!adv.completed) throw StepFailure(where + ": " + adv.failure, -1);
      res.total_steps += adv.steps;
      const auto d = l2_norms_2d(mesh, u, exact(c.t_end));
      res.table.rows.push_back({deg, k, 2.0 / static_cast<double>(k), d[0], d[1], d[2], {}});
    }
    res.fitted.emplace_back(deg, fitted_slope(res.table, deg));
  }
  compute_slopes(res.table);
  return res;
}

// free stream

struct FreestreamResult {
  double max_dudt_telescoping = 0.0;
  double max_dudt_chan = 0.0;
  double subcell_closure = 0.0;
  double subcell_gauss_residual = 0.0;
  double metric_identity = 0.0;
  State2 state{};
};

inline FreestreamResult run_freestream(const RunConfig& c) {
  FreestreamResult res;
  const auto gas = c.gas();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> pos(0.5, 2.0), vel(-1.0, 1.0);
  res.state = euler::prim_to_cons<2>({pos(rng), Vector<2>{{vel(rng), vel(rng)}}, pos(rng)}, gas);
  const auto mesh = mesh_2d(c, c.degrees.front(), c.elements.front());
  res.metric_identity = mesh2d::metric_identity_residual(mesh);
  const auto sn = mesh2d::subcell_normals(mesh);
  res.subcell_closure = sn.max_closure;
  res.subcell_gauss_residual = mesh2d::subcell_gauss_residual(mesh, sn);
  core2d::Dgsem2D dg(mesh, gas, scheme_2d(c));
  std::vector<State2> u(dg.num_dofs(), res.state), dudt(dg.num_dofs());
  auto max_norm = [&] {
    double m = 0.0;
    for (const auto& s : dudt) m = std::max(m, max_abs(s));
    return m;
  };
  dg.rhs(u, dudt, core1d::Formulation::Telescoping);
  res.max_dudt_telescoping = max_norm();
  dg.rhs(u, dudt, core1d::Formulation::Chan);
  res.max_dudt_chan = max_norm();
  return res;
}

// Sedov blast

inline double gaussian_bump(double r2, double sigma) {
  return std::exp(-0.5 * r2 / (sigma * sigma)) / (4.0 * std::numbers::pi * sigma * sigma);
}

inline std::vector<State2> sedov_initial(const mesh2d::QuadMesh& mesh, const euler::GasModel& gas) {
  return sample_2d(mesh, [&](const mesh2d::Vec2& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return euler::prim_to_cons<2>(
        {1.0 + gaussian_bump(r2, 0.25), Vector<2>{}, 0.1 + (gas.gamma - 1.0) * gaussian_bump(r2, 0.15)},
        gas);
  });
}

struct SedovResult {
  bool completed = false;
  std::string failure;
  std::size_t steps = 0;
  std::size_t retries = 0;
  double t = 0.0;
  double min_density = std::numeric_limits<double>::infinity();
  double min_pressure = std::numeric_limits<double>::infinity();
  double max_bound_violation = 0.0;   ///< forward-Euler candidates of accepted stages
  double max_conservation_drift = 0.0;  ///< per step, relative to the initial totals
  double max_fv_bound_violation = 0.0;
  std::size_t clamped_nodes = 0;
  double time_mean_alpha = 0.0;  ///< (1/t) integral of the mean coefficient
  double mean_dt = 0.0;
  double initial_dt = 0.0;
  double initial_mass = 0.0;
  double seconds = 0.0;
  std::vector<limiter::HistoryRow> history;
  std::vector<StepRow> log;
  std::vector<std::string> files;
};

/// Hybrid DG/FV run of the Gaussian blast with IDP time steps. Writes
/// field snapshots at the requested times, the alpha history and the step
/// log into the output directory. A failed run still writes the last valid
/// state.
inline SedovResult run_sedov(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  SedovResult res;
  const auto gas = c.gas();
  const auto mesh = mesh_2d(c, c.degrees.front(), c.elements.front());
  core2d::Dgsem2D dg(mesh, gas, scheme_2d(c));
  limiter::SubcellLimiter lim(dg);
  const auto rk = tint::low_storage_rk45();
  auto u = sedov_initial(mesh, gas);
  const std::size_t n = dg.n(), m = n * n;

  res.initial_mass = dg.totals(u)[0];
  const State2 totals0 = dg.totals(u);
  double scale = 0.0;
  for (std::size_t v = 0; v < 4; ++v) scale = std::max(scale, std::abs(totals0[v]));

  auto entropy_total = [&](const std::vector<State2>& s) {
    return dg.integrate([&](std::size_t e, std::size_t i, std::size_t j) {
      return euler::entropy<2>(s[e * m + i + n * j], gas);
    });
  };

  /// stage bookkeeping, committed when a step is accepted
  double stage_dt = 0.0;
  double attempt_violation = 0.0, attempt_fv = 0.0, attempt_alpha_sum = 0.0;
  std::size_t attempt_clamped = 0, attempt_stages = 0;
  std::vector<double> last_alpha(u.size(), 0.0), attempt_alpha;
  limiter::BlendField bf;

  auto hook = [&](const tint::StageInfo& info, const std::vector<State2>&) {
    stage_dt = info.dt;
    if (info.stage == 0) {
      attempt_violation = attempt_fv = attempt_alpha_sum = 0.0;
      attempt_clamped = attempt_stages = 0;
    }
  };
  auto rhs = [&](const std::vector<State2>& s, double, std::vector<State2>& dudt) {
    const auto rep = lim.rhs(s, stage_dt, dudt, &bf);
    attempt_violation = std::max(attempt_violation, rep.bound_violation);
    attempt_fv = std::max(attempt_fv, rep.alpha.fv_bound_violation);
    attempt_clamped += rep.alpha.clamped_nodes;
    attempt_alpha_sum += rep.mean_alpha;
    if (attempt_stages++ == 0) attempt_alpha = bf.nodal;
  };
  auto admissible = [&](const std::vector<State2>& s) {
    for (const auto& x : s)
      if (!euler::is_physical<2>(x, gas)) return false;
    try {
      core2d::FaceData fd;
      dg.exchange(s, fd);
      for (const auto& el : fd.inner)
        for (const auto& f : el)
          for (const auto& x : f)
            if (!euler::is_physical<2>(x, gas)) return false;
    } catch (const Error&) {
      return false;
    }
    return true;
  };

  std::vector<double> pending(c.snapshots);
  std::sort(pending.begin(), pending.end());
  auto snapshot = [&](const std::vector<State2>& s, const std::vector<double>& alpha, double t,
                      const std::string& tag) {
    if (c.output.empty()) return;
    std::ostringstream name;
    name << "field_" << tag << std::fixed << std::setprecision(3) << t;
    const auto csv = output_path(c, name.str() + ".csv");
    const auto vtk = output_path(c, name.str() + ".vtk");
    write_field(s, mesh, alpha, gas, csv);
    write_field_vtk(s, mesh, alpha, gas, vtk);
    res.files.push_back(csv);
    res.files.push_back(vtk);
  };

  /// the coefficient field of the initial data, for snapshots at t = 0
  {
    std::vector<State2> tmp(u.size());
    res.initial_dt = lim.idp_timestep(u, c.cfl);
    lim.rhs(u, res.initial_dt, tmp, &bf);
    last_alpha = bf.nodal;
  }
  while (!pending.empty() && pending.front() <= 0.0) {
    snapshot(u, last_alpha, 0.0, "t");
    pending.erase(pending.begin());
  }

  double t = 0.0;
  State2 totals_prev = totals0;
  double alpha_integral = 0.0;
  auto observer = [&](std::size_t step, double tn, double dt, const std::vector<State2>& s) {
    const State2 tot = dg.totals(s);
    res.max_conservation_drift =
        std::max(res.max_conservation_drift, max_abs(tot - totals_prev) / scale);
    totals_prev = tot;
    res.max_bound_violation = std::max(res.max_bound_violation, attempt_violation);
    res.max_fv_bound_violation = std::max(res.max_fv_bound_violation, attempt_fv);
    res.clamped_nodes += attempt_clamped;
    const double mean_alpha = attempt_alpha_sum / static_cast<double>(attempt_stages);
    alpha_integral += mean_alpha * dt;
    last_alpha = attempt_alpha;
    for (const auto& x : s) {
      res.min_density = std::min(res.min_density, x[0]);
      res.min_pressure = std::min(res.min_pressure, euler::pressure<2>(x, gas));
    }
    res.history.push_back({tn, mean_alpha, dt, step});
    res.log.push_back({step, tn, dt, mean_alpha, entropy_total(s)});
  };

  std::vector<double> stops(pending);
  if (stops.empty() || stops.back() < c.t_end) stops.push_back(c.t_end);
  std::size_t offset = 0;
  for (double stop : stops) {
    auto adv = tint::advance(
        u, t, stop, rk, [&](const std::vector<State2>& s, double) { return lim.idp_timestep(s, c.cfl); },
        rhs, hook, admissible,
        [&](std::size_t step, double tn, double dt, const std::vector<State2>& s) {
          observer(offset + step, tn, dt, s);
        });
    offset += adv.steps;
    res.retries += adv.retries;
    t = adv.t;
    if (!adv.completed) {
      res.failure = adv.failure;
      snapshot(u, last_alpha, t, "failed_t");
      break;
    }
    if (!pending.empty() && std::abs(pending.front() - stop) <= 1e-12) {
      snapshot(u, last_alpha, stop, "t");
      pending.erase(pending.begin());
    }
  }
  res.steps = offset;
  res.t = t;
  res.completed = res.failure.empty();
  res.time_mean_alpha = t > 0.0 ? alpha_integral / t : 0.0;
  res.mean_dt = res.steps ? t / static_cast<double>(res.steps) : 0.0;
  if (!c.output.empty()) {
    limiter::write_history_csv(res.history, output_path(c, "history.csv"));
    write_step_log(res.log, output_path(c, "steps.csv"));
    res.files.push_back(output_path(c, "history.csv"));
    res.files.push_back(output_path(c, "steps.csv"));
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace fdg::harness
