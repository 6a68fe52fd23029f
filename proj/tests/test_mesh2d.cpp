#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fdg/mesh2d.hpp"

using namespace fdg;
using namespace fdg::mesh2d;

namespace {

const Rect unit_square{};

class MeshBothKinds : public ::testing::TestWithParam<NodeKind> {};

}  // namespace

TEST(Mesh2d, SingleElementIdentity) {
  const auto m = build_cartesian_mesh(1, 1, unit_square, gauss_rule(3));
  ASSERT_EQ(m.size(), 1u);
  for (std::size_t q = 0; q < m.nodes_per_element(); ++q) {
    EXPECT_EQ(m.elements[0].jac[q], 1.0);
    EXPECT_EQ(m.elements[0].ja1[q][0], 1.0);
    EXPECT_EQ(m.elements[0].ja1[q][1], 0.0);
    EXPECT_EQ(m.elements[0].ja2[q][0], 0.0);
    EXPECT_EQ(m.elements[0].ja2[q][1], 1.0);
  }
}

TEST(Mesh2d, CartesianPaperGrid) {
  const auto m = build_cartesian_mesh(64, 64, unit_square, gauss_rule(3));
  EXPECT_EQ(m.size(), 64u * 64u);
  const double h = 2.0 / 64.0;
  EXPECT_DOUBLE_EQ(m.elements[123].jac[5], h * h / 4.0);
  EXPECT_LT(metric_identity_residual(m), 1e-14);
}

TEST(Mesh2d, DegenerateInputs) {
  EXPECT_THROW(build_cartesian_mesh(0, 3, unit_square, gauss_rule(2)), InvalidMesh);
  EXPECT_THROW(build_cartesian_mesh(2, 2, Rect{1.0, 1.0, 0.0, 1.0}, gauss_rule(2)), InvalidMesh);
  /// a pi > 1 folds the map
  EXPECT_THROW(build_warped_mesh(4, 4, unit_square, gauss_rule(3), 0.8), InvalidWarp);
}

TEST(Mesh2d, PeriodicNeighbors) {
  const auto m = build_cartesian_mesh(3, 2, unit_square, gauss_rule(1));
  EXPECT_EQ(m.neighbor(0, XiMinus), 2u);
  EXPECT_EQ(m.neighbor(2, XiPlus), 0u);
  EXPECT_EQ(m.neighbor(0, EtaMinus), 3u);
  EXPECT_EQ(m.neighbor(4, EtaPlus), 1u);
  for (std::size_t e = 0; e < m.size(); ++e) {
    EXPECT_EQ(m.neighbor(m.neighbor(e, XiPlus), XiMinus), e);
    EXPECT_EQ(m.neighbor(m.neighbor(e, EtaPlus), EtaMinus), e);
  }
}

TEST_P(MeshBothKinds, ZeroAmplitudeIsCartesian) {
  const auto rule = make_rule(GetParam(), 3);
  const auto a = build_cartesian_mesh(4, 3, unit_square, rule);
  const auto b = build_warped_mesh(4, 3, unit_square, rule, 0.0);
  for (std::size_t e = 0; e < a.size(); ++e) {
    EXPECT_EQ(a.elements[e].x, b.elements[e].x);
    EXPECT_EQ(a.elements[e].jac, b.elements[e].jac);
  }
}

TEST_P(MeshBothKinds, WarpedMetricIdentity) {
  const auto m = build_warped_mesh(4, 4, unit_square, make_rule(GetParam(), 3), 0.06);
  EXPECT_GT(min_jacobian(m), 0.0);
  EXPECT_LT(metric_identity_residual(m), 1e-12);
  EXPECT_LT(watertightness_residual(m), 1e-15);
  /// the mapping is a bijection of the periodic square, so J integrates to its area
  EXPECT_NEAR(m.integrate([](auto, auto, auto) { return 1.0; }), 4.0, 1e-12);
}

TEST_P(MeshBothKinds, WarpedNodesFollowTheMap) {
  /// with the geometry degree high enough the interpolated positions
  /// approach the analytic warp
  const double a = 0.05;
  const auto m = build_warped_mesh(2, 2, unit_square, make_rule(GetParam(), 12), a);
  const double dx = 1.0;
  for (std::size_t e = 0; e < m.size(); ++e) {
    const std::size_t ex = e % 2, ey = e / 2;
    const auto& xi = m.ops.rule.nodes;
    const std::size_t n = m.n();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double X = -1.0 + dx * (ex + 0.5 * (xi[i] + 1.0));
        const double Y = -1.0 + dx * (ey + 0.5 * (xi[j] + 1.0));
        const double s = a * std::sin(std::numbers::pi * X) * std::sin(std::numbers::pi * Y);
        EXPECT_NEAR(m.elements[e].x[i + n * j][0], X + s, 1e-9);
        EXPECT_NEAR(m.elements[e].x[i + n * j][1], Y + s, 1e-9);
      }
  }
}

TEST_P(MeshBothKinds, CartesianSubcellNormalsConstant) {
  const auto m = build_cartesian_mesh(4, 2, Rect{0.0, 2.0, 0.0, 3.0}, make_rule(GetParam(), 4));
  const auto sn = subcell_normals(m);
  const std::size_t n = m.n();
  const double dx = 0.5, dy = 1.5;
  for (const auto& el : sn.elements)
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t s = 0; s <= n; ++s) {
        EXPECT_NEAR(el.at(0, t, s, n)[0], 0.5 * dy, 1e-13);
        EXPECT_NEAR(el.at(0, t, s, n)[1], 0.0, 1e-13);
        EXPECT_NEAR(el.at(1, t, s, n)[0], 0.0, 1e-13);
        EXPECT_NEAR(el.at(1, t, s, n)[1], 0.5 * dx, 1e-13);
      }
}

TEST_P(MeshBothKinds, WarpedSubcellNormalsClose) {
  for (int deg = 1; deg <= 6; ++deg) {
    const auto m = build_warped_mesh(4, 4, unit_square, make_rule(GetParam(), deg), 0.06);
    const auto sn = subcell_normals(m);
    EXPECT_LT(sn.max_closure, 1e-12) << deg;
    EXPECT_LT(subcell_gauss_residual(m, sn), 1e-12) << deg;
  }
}

TEST_P(MeshBothKinds, SubcellNormalsMatchUnsimplifiedRecurrence) {
  /// the general telescoping recurrence with averaged metrics as pair fluxes;
  /// the face-point metric is arbitrary because it cancels
  const auto m = build_warped_mesh(3, 3, unit_square, make_rule(GetParam(), 4), 0.06);
  const auto sn = subcell_normals(m);
  const std::size_t n = m.n();
  const Vec2 junk{{7.0, -3.0}};
  for (std::size_t e = 0; e < m.size(); ++e) {
    const auto& g = m.elements[e];
    for (std::size_t t = 0; t < n; ++t) {
      auto ja = [&](std::size_t k) { return k < n ? g.ja1[k + n * t] : junk; };
      auto pair = [&](std::size_t a, std::size_t b) { return 0.5 * (ja(a) + ja(b)); };
      std::vector<Vec2> ref(n + 1);
      telescoping_recurrence<Vec2>(m.ops, pair, g.face_normal[XiMinus][t],
                                   g.face_normal[XiPlus][t], std::span<Vec2>(ref));
      for (std::size_t s = 0; s <= n; ++s)
        EXPECT_LT(max_abs(ref[s] - sn.elements[e].at(0, t, s, n)), 1e-13);
    }
  }
}

TEST(Mesh2d, SubcellClosureViolationDetected) {
  auto m = build_warped_mesh(2, 2, unit_square, gauss_rule(3), 0.06);
  /// a non-finite metric term cannot close
  m.elements[1].ja1[5][0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(subcell_normals(m), MetricInconsistency);
}

TEST(Mesh2d, SummaryReport) {
  const auto m = build_warped_mesh(4, 4, unit_square, gauss_rule(3), 0.06);
  std::ostringstream os;
  write_summary(os, m);
  const auto text = os.str();
  EXPECT_NE(text.find("mesh 4x4 elements, gauss nodes, N = 3"), std::string::npos);
  EXPECT_NE(text.find("metric identity residual"), std::string::npos);
  EXPECT_NE(text.find("nodes 256"), std::string::npos);
}

INSTANTIATE_TEST_SUITE_P(Kinds, MeshBothKinds,
                         ::testing::Values(NodeKind::Gauss, NodeKind::GaussLobatto),
                         [](const auto& info) { return std::string(to_string(info.param)); });
