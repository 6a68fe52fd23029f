#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fdg/core2d.hpp"
#include "fdg/errors.hpp"
#include "fdg/euler.hpp"
#include "fdg/mesh2d.hpp"

namespace fdg::harness {

struct OutputError : Error {
  using Error::Error;
};

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw OutputError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw OutputError("write failed: " + path);
}

}  // namespace detail

inline const char* field_csv_header = "x,y,rho,vx,vy,p,alpha";

/// One row per node: x, y, rho, vx, vy, p, alpha. `alpha` may be empty
/// (written as zeros).
inline void write_field(std::span<const core2d::State> u, const mesh2d::QuadMesh& mesh,
                        const std::vector<double>& alpha, const euler::GasModel& gas,
                        const std::string& path) {
  const std::size_t m = mesh.nodes_per_element();
  if (u.size() != mesh.size() * m || (!alpha.empty() && alpha.size() != u.size()))
    throw ContractViolation("field size does not match the mesh");
  auto out = detail::open_for_write(path);
  out << field_csv_header << '\n';
  for (std::size_t e = 0; e < mesh.size(); ++e)
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t g = e * m + q;
      const auto w = euler::cons_to_prim<2>(u[g], gas);
      const auto& x = mesh.elements[e].x[q];
      out << x[0] << ',' << x[1] << ',' << w.rho << ',' << w.vel[0] << ',' << w.vel[1] << ','
          << w.p << ',' << (alpha.empty() ? 0.0 : alpha[g]) << '\n';
    }
  detail::finish(out, path);
}

/// Legacy ASCII VTK structured grid; nodes are arranged by global index
/// (ex n + i, ey n + j).
inline void write_field_vtk(std::span<const core2d::State> u, const mesh2d::QuadMesh& mesh,
                            const std::vector<double>& alpha, const euler::GasModel& gas,
                            const std::string& path) {
  const std::size_t n = mesh.n(), m = n * n;
  const std::size_t nx = mesh.kx * n, ny = mesh.ky * n;
  auto global = [&](std::size_t I, std::size_t J) {
    const std::size_t e = mesh.element_index(I / n, J / n);
    return std::pair{e, (I % n) + n * (J % n)};
  };
  auto out = detail::open_for_write(path);
  out << "# vtk DataFile Version 3.0\nfdg field\nASCII\nDATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << nx << ' ' << ny << " 1\nPOINTS " << nx * ny << " double\n";
  for (std::size_t J = 0; J < ny; ++J)
    for (std::size_t I = 0; I < nx; ++I) {
      const auto [e, q] = global(I, J);
      out << mesh.elements[e].x[q][0] << ' ' << mesh.elements[e].x[q][1] << " 0\n";
    }
  out << "POINT_DATA " << nx * ny << '\n';
  auto scalar = [&](const char* name, auto&& value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t J = 0; J < ny; ++J)
      for (std::size_t I = 0; I < nx; ++I) {
        const auto [e, q] = global(I, J);
        out << value(e * m + q) << '\n';
      }
  };
  scalar("rho", [&](std::size_t g) { return u[g][0]; });
  scalar("p", [&](std::size_t g) { return euler::pressure<2>(u[g], gas); });
  scalar("alpha", [&](std::size_t g) { return alpha.empty() ? 0.0 : alpha[g]; });
  out << "VECTORS velocity double\n";
  for (std::size_t J = 0; J < ny; ++J)
    for (std::size_t I = 0; I < nx; ++I) {
      const auto [e, q] = global(I, J);
      const auto v = euler::velocity<2>(u[e * m + q]);
      out << v[0] << ' ' << v[1] << " 0\n";
    }
  detail::finish(out, path);
}

/// Comma-separated numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw OutputError("cannot open " + path + " for reading");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw OutputError(path + " is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ','))
      row.push_back(cell.empty() ? std::nan("") : std::stod(cell));
    if (line.back() == ',') row.push_back(std::nan(""));
    if (row.size() != t.header.size())
      throw OutputError(path + ": row width " + std::to_string(row.size()) + " differs from header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Error table row: per-variable L2 norms at (N, K) and the density slope
/// against the previous level.
struct ErrorRow {
  int degree;
  std::size_t elements;
  double h;
  double rho;
  double momentum;
  double energy;
  std::optional<double> slope;
};

struct ErrorTable {
  std::string quantity;  ///< "difference" or "error"
  std::vector<ErrorRow> rows;

  std::vector<const ErrorRow*> for_degree(int n) const {
    std::vector<const ErrorRow*> r;
    for (const auto& row : rows)
      if (row.degree == n) r.push_back(&row);
    return r;
  }
};

/// Least-squares slope of log(err) against log(h); defined only for at
/// least three levels.
inline std::optional<double> fitted_slope(const std::vector<double>& h,
                                          const std::vector<double>& err) {
  if (h.size() < 3 || h.size() != err.size()) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

/// Fills the pairwise slopes once every degree has at least three levels.
inline void compute_slopes(ErrorTable& t) {
  std::vector<int> degs;
  for (const auto& r : t.rows)
    if (std::find(degs.begin(), degs.end(), r.degree) == degs.end()) degs.push_back(r.degree);
  for (int d : degs) {
    std::vector<ErrorRow*> rows;
    for (auto& r : t.rows)
      if (r.degree == d) rows.push_back(&r);
    for (std::size_t i = 0; i < rows.size(); ++i)
      rows[i]->slope = (rows.size() >= 3 && i > 0)
                           ? std::optional<double>(std::log(rows[i - 1]->rho / rows[i]->rho) /
                                                   std::log(rows[i - 1]->h / rows[i]->h))
                           : std::nullopt;
  }
}

inline std::optional<double> fitted_slope(const ErrorTable& t, int degree) {
  std::vector<double> h, e;
  for (const auto* r : t.for_degree(degree)) {
    h.push_back(r->h);
    e.push_back(r->rho);
  }
  return fitted_slope(h, e);
}

inline const char* table_csv_header = "N,K,h,l2_rho,l2_momentum,l2_energy,slope_rho";

/// Missing slopes are written as empty cells.
inline void write_table(const ErrorTable& t, const std::string& path) {
  auto out = detail::open_for_write(path);
  out << table_csv_header << '\n';
  for (const auto& r : t.rows) {
    out << r.degree << ',' << r.elements << ',' << r.h << ',' << r.rho << ',' << r.momentum << ','
        << r.energy << ',';
    if (r.slope) out << *r.slope;
    out << '\n';
  }
  detail::finish(out, path);
}

/// Per-step log of a time integration.
struct StepRow {
  std::size_t step;
  double t;
  double dt;
  double mean_alpha;
  double entropy;
};

inline void write_step_log(const std::vector<StepRow>& rows, const std::string& path) {
  auto out = detail::open_for_write(path);
  out << "step,t,dt,mean_alpha,entropy\n";
  for (const auto& r : rows)
    out << r.step << ',' << r.t << ',' << r.dt << ',' << r.mean_alpha << ',' << r.entropy << '\n';
  detail::finish(out, path);
}

}  // namespace fdg::harness
