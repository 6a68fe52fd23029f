#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "fdg/limiter.hpp"
#include "test_util.hpp"

using namespace fdg;
using namespace fdg::limiter;

namespace {

const euler::GasModel gas{};
const mesh2d::Rect square{};

core2d::Scheme2D sedov_scheme() {
  return core2d::Scheme2D{euler::TwoPointFlux::Average,
                          euler::SurfaceFlux{euler::TwoPointFlux::Average, true},
                          FaceProjection::Entropy};
}

/// Gaussian blast initial data on the mesh nodes.
std::vector<State> blast(const mesh2d::QuadMesh& mesh) {
  const std::size_t m = mesh.nodes_per_element();
  std::vector<State> u(mesh.size() * m);
  auto G = [](double r2, double s) {
    return std::exp(-0.5 * r2 / (s * s)) / (4.0 * std::numbers::pi * s * s);
  };
  for (std::size_t e = 0; e < mesh.size(); ++e)
    for (std::size_t q = 0; q < m; ++q) {
      const auto& x = mesh.elements[e].x[q];
      const double r2 = x[0] * x[0] + x[1] * x[1];
      u[e * m + q] = euler::prim_to_cons<2>(
          {1.0 + G(r2, 0.25), mesh2d::Vec2{}, 0.1 + 0.4 * G(r2, 0.15)}, gas);
    }
  return u;
}

std::vector<State> jittered(std::mt19937_64& rng, std::size_t count, double amp) {
  std::uniform_real_distribution<double> jit(-amp, amp);
  std::vector<State> u(count);
  for (auto& s : u)
    s = euler::prim_to_cons<2>(
        {1.0 * (1.0 + jit(rng)), mesh2d::Vec2{{0.3 + jit(rng), -0.2 + jit(rng)}},
         1.0 * (1.0 + jit(rng))},
        gas);
  return u;
}

/// Global structured index of a node on a Cartesian mesh.
struct GridIndex {
  std::size_t kx, ky, n;
  std::size_t nx() const { return kx * n; }
  std::size_t ny() const { return ky * n; }
  std::size_t local(std::size_t gx, std::size_t gy) const {
    const std::size_t e = (gx / n) + kx * (gy / n);
    return e * n * n + (gx % n) + n * (gy % n);
  }
};

double max_norm(const std::vector<State>& u) {
  double m = 0.0;
  for (const auto& s : u) m = std::max(m, max_abs(s));
  return m;
}

}  // namespace

TEST(Limiter, ConstantFieldIsInert) {
  const auto mesh = mesh2d::build_warped_mesh(3, 3, square, gauss_rule(3), 0.06);
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  const auto u0 = euler::prim_to_cons<2>({1.2, mesh2d::Vec2{{0.3, 0.1}}, 0.9}, gas);
  std::vector<State> u(dg.num_dofs(), u0);
  const auto fv = lim.fv_fluxes(u);
  const std::size_t n = dg.n();
  for (std::size_t e = 0; e < mesh.size(); ++e)
    for (int d = 0; d < 2; ++d)
      for (std::size_t t = 0; t < n; ++t)
        for (std::size_t s = 0; s <= n; ++s) {
          const auto f = euler::physical_flux<2>(u0, lim.normals().elements[e].at(d, t, s, n), gas);
          EXPECT_LT(max_abs(fv[e].at(d, t, s, n) - f), 1e-14);
        }
  const auto b = lim.idp_bounds(u);
  for (std::size_t q = 0; q < u.size(); ++q) {
    EXPECT_NEAR(b.rho_min[q], 1.2, 1e-15);
    EXPECT_NEAR(b.rho_max[q], 1.2, 1e-15);
  }
  const auto alpha = lim.provisional_alpha(u, b, lim.dg_fluxes(u), fv, lim.idp_timestep(u));
  for (double a : alpha) EXPECT_EQ(a, 0.0);
}

TEST(Limiter, ContactFluxByHand) {
  /// two nodes per line: rho = 1 | 2 at rest with p = 1
  const auto mesh = mesh2d::build_cartesian_mesh(1, 1, square, gauss_rule(1));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  std::vector<State> u(4);
  for (std::size_t j = 0; j < 2; ++j) {
    u[0 + 2 * j] = euler::prim_to_cons<2>({1.0, mesh2d::Vec2{}, 1.0}, gas);
    u[1 + 2 * j] = euler::prim_to_cons<2>({2.0, mesh2d::Vec2{}, 1.0}, gas);
  }
  const auto fv = lim.fv_fluxes(u);
  const double c = std::sqrt(1.4);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto& f = fv[0].at(0, t, 1, 2);
    EXPECT_NEAR(f[0], -0.5 * c, 1e-15);
    EXPECT_NEAR(f[1], 1.0, 1e-15);
    EXPECT_NEAR(f[2], 0.0, 1e-15);
    EXPECT_NEAR(f[3], 0.0, 1e-15);
  }
}

TEST(Limiter, BoundsMatchBruteForceStencil) {
  const std::size_t kx = 3, ky = 2;
  const auto mesh = mesh2d::build_cartesian_mesh(kx, ky, square, gauss_rule(2));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  std::mt19937_64 rng(3);
  auto u = jittered(rng, dg.num_dofs(), 0.15);
  u[40] = euler::prim_to_cons<2>({6.0, mesh2d::Vec2{}, 1.0}, gas);
  const auto b = lim.idp_bounds(u);
  const GridIndex g{kx, ky, dg.n()};
  const mesh2d::Vec2 ex{{1.0, 0.0}}, ey{{0.0, 1.0}};
  for (std::size_t gy = 0; gy < g.ny(); ++gy)
    for (std::size_t gx = 0; gx < g.nx(); ++gx) {
      const std::size_t q = g.local(gx, gy);
      const auto& ui = u[q];
      std::vector<double> cand{ui[0]};
      cand.push_back(euler::bar_state<2>(ui, u[g.local((gx + 1) % g.nx(), gy)], ex, gas)[0]);
      cand.push_back(euler::bar_state<2>(u[g.local((gx + g.nx() - 1) % g.nx(), gy)], ui, ex, gas)[0]);
      cand.push_back(euler::bar_state<2>(ui, u[g.local(gx, (gy + 1) % g.ny())], ey, gas)[0]);
      cand.push_back(euler::bar_state<2>(u[g.local(gx, (gy + g.ny() - 1) % g.ny())], ui, ey, gas)[0]);
      EXPECT_NEAR(b.rho_min[q], *std::min_element(cand.begin(), cand.end()), 1e-14);
      EXPECT_NEAR(b.rho_max[q], *std::max_element(cand.begin(), cand.end()), 1e-14);
    }
}

TEST(Limiter, IdpTimestepByHand) {
  const auto mesh = mesh2d::build_cartesian_mesh(1, 1, square, gauss_rule(1));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  std::vector<State> u(4, euler::prim_to_cons<2>({1.0, mesh2d::Vec2{}, 1.0}, gas));
  EXPECT_NEAR(lim.idp_timestep(u), 1.0 / (4.0 * std::sqrt(1.4)), 1e-15);
  EXPECT_NEAR(lim.idp_timestep(u, 0.9), 0.9 / (4.0 * std::sqrt(1.4)), 1e-15);
}

TEST(Limiter, IdpTimestepScaling) {
  const auto rest = euler::prim_to_cons<2>({1.0, mesh2d::Vec2{}, 1.0}, gas);
  auto dt_for = [&](NodeKind kind, std::size_t k) {
    const auto mesh = mesh2d::build_cartesian_mesh(k, k, square, make_rule(kind, 3));
    core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
    SubcellLimiter lim(dg);
    std::vector<State> u(dg.num_dofs(), rest);
    return lim.idp_timestep(u);
  };
  EXPECT_NEAR(dt_for(NodeKind::Gauss, 8) / dt_for(NodeKind::Gauss, 16), 2.0, 1e-12);
  EXPECT_GT(dt_for(NodeKind::Gauss, 8), dt_for(NodeKind::GaussLobatto, 8));
}

TEST(Limiter, InterfaceMaxRule) {
  const auto mesh = mesh2d::build_cartesian_mesh(2, 1, square, gauss_rule(2));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  const std::size_t n = 3, m = 9;
  {
    const auto bf = lim.interface_alpha(std::vector<double>(2 * m, 0.0));
    for (const auto& el : bf.interface)
      for (const auto& d : el)
        for (double a : d) EXPECT_EQ(a, 0.0);
  }
  {
    std::vector<double> nodal(2 * m, 0.0);
    nodal[1 + n * 1] = 1.0;  // element 0, node (1, 1)
    const auto bf = lim.interface_alpha(nodal);
    const auto& a = bf.interface[0];
    EXPECT_EQ(a[0][(n + 1) * 1 + 1], 1.0);
    EXPECT_EQ(a[0][(n + 1) * 1 + 2], 1.0);
    EXPECT_EQ(a[0][(n + 1) * 1 + 0], 0.0);
    EXPECT_EQ(a[0][(n + 1) * 1 + 3], 0.0);
    EXPECT_EQ(a[1][(n + 1) * 1 + 1], 1.0);
    EXPECT_EQ(a[1][(n + 1) * 1 + 2], 1.0);
  }
  {
    /// element 0's right boundary node 0.3, element 1's left boundary node 0.7
    std::vector<double> nodal(2 * m, 0.0);
    nodal[2 + n * 0] = 0.3;
    nodal[m + 0 + n * 0] = 0.7;
    const auto bf = lim.interface_alpha(nodal);
    EXPECT_EQ(bf.interface[0][0][n], 0.7);
    EXPECT_EQ(bf.interface[1][0][0], 0.7);
  }
}

TEST(Limiter, BlendingEndpointsAndConservation) {
  const auto mesh = mesh2d::build_warped_mesh(3, 3, square, gauss_rule(3), 0.06);
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  std::mt19937_64 rng(9);
  const auto u = jittered(rng, dg.num_dofs(), 0.2);
  const auto hi = lim.dg_fluxes(u);
  const auto lo = lim.fv_fluxes(u);
  auto check = [&](double value) {
    const auto bf = lim.interface_alpha(std::vector<double>(u.size(), value));
    return lim.blend_fluxes(hi, lo, bf);
  };
  const auto zero = check(0.0), one = check(1.0), half = check(0.5);
  for (std::size_t e = 0; e < hi.size(); ++e)
    for (std::size_t d = 0; d < 2; ++d)
      for (std::size_t k = 0; k < hi[e].dir[d].size(); ++k) {
        EXPECT_EQ(zero[e].dir[d][k], hi[e].dir[d][k]);
        EXPECT_EQ(one[e].dir[d][k], lo[e].dir[d][k]);
        EXPECT_LT(max_abs(half[e].dir[d][k] - 0.5 * (hi[e].dir[d][k] + lo[e].dir[d][k])), 1e-15);
      }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> nodal(u.size());
    for (auto& a : nodal) a = unit(rng);
    const auto bf = lim.interface_alpha(nodal);
    std::vector<State> dudt(u.size());
    lim.assemble(lim.blend_fluxes(hi, lo, bf), dudt);
    EXPECT_LT(max_abs(dg.totals(dudt)), 1e-13 * max_norm(dudt));
  }

  auto bad = lim.interface_alpha(std::vector<double>(u.size(), 0.0));
  bad.interface[2][1][3] = 1.5;
  EXPECT_THROW(lim.blend_fluxes(hi, lo, bad), ContractViolation);
}

TEST(Limiter, MeanAlpha) {
  const auto mesh = mesh2d::build_cartesian_mesh(4, 4, square, lobatto_rule(3));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  const std::size_t m = mesh.nodes_per_element();
  EXPECT_EQ(lim.mean_alpha(std::vector<double>(16 * m, 0.0)), 0.0);
  EXPECT_NEAR(lim.mean_alpha(std::vector<double>(16 * m, 1.0)), 1.0, 1e-14);
  std::vector<double> half(16 * m, 0.0);
  for (std::size_t e = 0; e < 16; ++e)
    if (e % 4 < 2)
      for (std::size_t q = 0; q < m; ++q) half[e * m + q] = 1.0;
  EXPECT_NEAR(lim.mean_alpha(half), 0.5, 1e-12);
}

TEST(Limiter, AlphaMonotoneInOvershoot) {
  /// scaling one antidiffusive density flux up never lowers the coefficient
  const auto mesh = mesh2d::build_cartesian_mesh(2, 2, square, gauss_rule(3));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  std::mt19937_64 rng(21);
  const auto u = jittered(rng, dg.num_dofs(), 0.1);
  const auto b = lim.idp_bounds(u);
  const auto lo = lim.fv_fluxes(u);
  auto hi = lim.dg_fluxes(u);
  const double dt = lim.idp_timestep(u);
  const std::size_t n = dg.n();
  /// interface s = 2 on line 1 of element 0 sits between nodes (1,1) and (2,1)
  double prev_l = -1.0, prev_r = -1.0;
  for (double scale : {0.0, 1.0, 4.0, 16.0, 64.0, 256.0}) {
    Flux f = lo[0].at(0, 1, 2, n);
    f[0] += 0.05 * scale;
    hi[0].at(0, 1, 2, n) = f;
    const auto a = lim.provisional_alpha(u, b, hi, lo, dt);
    const double al = a[1 + n * 1], ar = a[2 + n * 1];
    EXPECT_GE(al, prev_l);
    EXPECT_GE(ar, prev_r);
    prev_l = al;
    prev_r = ar;
  }
  EXPECT_GT(std::max(prev_l, prev_r), 0.0);
}

TEST(Limiter, ForwardEulerRespectsBounds) {
  for (auto kind : {NodeKind::Gauss, NodeKind::GaussLobatto}) {
    const auto mesh = mesh2d::build_warped_mesh(4, 4, square, make_rule(kind, 3), 0.06);
    core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
    SubcellLimiter lim(dg);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      auto u = jittered(rng, dg.num_dofs(), 0.15);
      const double dt = lim.idp_timestep(u, 0.9);
      std::vector<State> dudt(u.size());
      BlendField bf;
      const auto rep = lim.rhs(u, dt, dudt, &bf);
      EXPECT_LE(rep.bound_violation, 1e-10) << to_string(kind);
      EXPECT_EQ(rep.alpha.clamped_nodes, 0u);
      EXPECT_GE(rep.mean_alpha, 0.0);
      EXPECT_LE(rep.mean_alpha, 1.0);
      EXPECT_GT(rep.mean_alpha, 0.0) << "rough data should need some limiting";
      EXPECT_LT(max_abs(dg.totals(dudt)), 1e-13 * max_norm(dudt));
    }
    /// the blast initial data as well
    const auto u = blast(mesh);
    std::vector<State> dudt(u.size());
    const auto rep = lim.rhs(u, lim.idp_timestep(u, 0.9), dudt);
    EXPECT_LE(rep.bound_violation, 1e-10);
  }
}

TEST(Limiter, SmoothFieldNeedsLittleLimiting) {
  /// rho = 2 + sin pi (x + y), v = (1, 1), p = 1 on a fine mesh
  const auto mesh = mesh2d::build_cartesian_mesh(16, 16, square, gauss_rule(3));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  const std::size_t m = mesh.nodes_per_element();
  std::vector<State> u(dg.num_dofs());
  for (std::size_t e = 0; e < mesh.size(); ++e)
    for (std::size_t q = 0; q < m; ++q) {
      const auto& x = mesh.elements[e].x[q];
      u[e * m + q] = euler::prim_to_cons<2>(
          {2.0 + std::sin(std::numbers::pi * (x[0] + x[1])), mesh2d::Vec2{{1.0, 1.0}}, 1.0}, gas);
    }
  std::vector<State> dudt(u.size());
  BlendField bf;
  const auto rep = lim.rhs(u, lim.idp_timestep(u, 0.9), dudt, &bf);
  const double amax = *std::max_element(bf.nodal.begin(), bf.nodal.end());
  std::printf("smooth field: mean alpha %.3e, max alpha %.3e\n", rep.mean_alpha, amax);
  RecordProperty("smooth_mean_alpha", std::to_string(rep.mean_alpha));
  EXPECT_LT(rep.mean_alpha, 1e-2);
}

TEST(Limiter, FvOnlyBlastStaysPositive) {
  /// pure first-order scheme with forward Euler at the IDP step
  const auto mesh = mesh2d::build_cartesian_mesh(16, 16, square, gauss_rule(3));
  core2d::Dgsem2D dg(mesh, gas, sedov_scheme());
  SubcellLimiter lim(dg);
  auto u = blast(mesh);
  const auto total0 = dg.totals(u);
  double t = 0.0;
  std::size_t steps = 0;
  std::vector<State> dudt(u.size());
  const auto ones = lim.interface_alpha(std::vector<double>(u.size(), 1.0));
  while (t < 1.0) {
    const double dt = std::min(lim.idp_timestep(u, 0.9), 1.0 - t);
    const auto b = lim.idp_bounds(u);
    lim.assemble(lim.blend_fluxes(lim.fv_fluxes(u), lim.fv_fluxes(u), ones), dudt);
    for (std::size_t q = 0; q < u.size(); ++q) u[q] += dt * dudt[q];
    ASSERT_LE(SubcellLimiter::bounds_violation(u, b), 1e-10) << "t = " << t;
    for (const auto& s : u) ASSERT_TRUE(euler::is_physical<2>(s, gas)) << "t = " << t;
    t += dt;
    ++steps;
  }
  EXPECT_LT(max_abs(dg.totals(u) - total0), 1e-12 * max_abs(total0));
  std::printf("FV-only blast: %zu steps\n", steps);
}

TEST(Limiter, HistoryCsv) {
  const auto path = std::filesystem::temp_directory_path() / "fdg_history_test.csv";
  write_history_csv({{0.0, 0.1, 0.01, 1}, {0.01, 0.2, 0.01, 2}}, path.string());
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "t,mean_alpha,dt,step");
  EXPECT_EQ(row, "0,0.10000000000000001,0.01,1");
  std::filesystem::remove(path);
}
