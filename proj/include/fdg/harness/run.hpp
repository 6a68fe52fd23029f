#pragma once

#include <string>

#include "fdg/harness/config.hpp"
#include "fdg/harness/experiments.hpp"
#include "fdg/harness/output.hpp"

namespace fdg::harness {

/// Outcome of a dispatched run: a JSON summary (also written as
/// summary.json) and whether the numerics completed.
struct RunOutcome {
  json summary;
  bool ok = true;
};

namespace detail {

inline json table_json(const ErrorTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row{{"N", r.degree}, {"K", r.elements}, {"h", r.h},
             {"l2_rho", r.rho}, {"l2_momentum", r.momentum}, {"l2_energy", r.energy}};
    row["slope_rho"] = r.slope ? json(*r.slope) : json(nullptr);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

/// Validates, prepares the output directory, echoes the resolved config and
/// runs the selected experiment.
inline RunOutcome run(const RunConfig& c) {
  validate(c);
  prepare_output(c.output);
  write_json(to_json(c), output_path(c, "config.resolved.json"));
  RunOutcome out;
  json& s = out.summary;
  s["experiment"] = to_string(c.experiment);
  switch (c.experiment) {
    case Experiment::Equivalence: {
      const auto r = run_equivalence(c);
      write_table(r.table, output_path(c, "table.csv"));
      s["quantity"] = r.table.quantity;
      s["rows"] = detail::table_json(r.table);
      s["max_difference"] = r.max_difference;
      s["steps"] = r.total_steps;
      break;
    }
    case Experiment::Convergence1d:
    case Experiment::Convergence2d: {
      const auto r = c.experiment == Experiment::Convergence1d ? run_convergence1d(c)
                                                               : run_convergence2d(c);
      write_table(r.table, output_path(c, "table.csv"));
      s["quantity"] = r.table.quantity;
      s["rows"] = detail::table_json(r.table);
      json fits = json::object();
      for (const auto& [d, v] : r.fitted)
        fits[std::to_string(d)] = v ? json(*v) : json(nullptr);
      s["fitted_slope_rho"] = fits;
      s["steps"] = r.total_steps;
      break;
    }
    case Experiment::Freestream: {
      const auto r = run_freestream(c);
      s["max_dudt_telescoping"] = r.max_dudt_telescoping;
      s["max_dudt_chan"] = r.max_dudt_chan;
      s["subcell_closure"] = r.subcell_closure;
      s["subcell_gauss_residual"] = r.subcell_gauss_residual;
      s["metric_identity_residual"] = r.metric_identity;
      s["state"] = std::vector<double>(r.state.v.begin(), r.state.v.end());
      break;
    }
    case Experiment::Sedov: {
      const auto r = run_sedov(c);
      s["completed"] = r.completed;
      s["failure"] = r.failure;
      s["t"] = r.t;
      s["steps"] = r.steps;
      s["retries"] = r.retries;
      s["min_density"] = r.min_density;
      s["min_pressure"] = r.min_pressure;
      s["max_bound_violation"] = r.max_bound_violation;
      s["max_fv_bound_violation"] = r.max_fv_bound_violation;
      s["clamped_nodes"] = r.clamped_nodes;
      s["max_conservation_drift_per_step"] = r.max_conservation_drift;
      s["time_mean_alpha"] = r.time_mean_alpha;
      s["mean_dt"] = r.mean_dt;
      s["initial_dt"] = r.initial_dt;
      s["initial_mass"] = r.initial_mass;
      s["seconds"] = r.seconds;
      s["files"] = r.files;
      out.ok = r.completed;
      break;
    }
  }
  write_json(s, output_path(c, "summary.json"));
  return out;
}

}  // namespace fdg::harness
