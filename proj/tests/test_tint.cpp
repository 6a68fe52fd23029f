#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fdg/tint.hpp"

using namespace fdg;

namespace {

double decay_error(double dt) {
  std::vector<double> u{1.0};
  const auto scheme = tint::low_storage_rk45();
  auto res = tint::advance(
      u, 0.0, 1.0, scheme, [&](const std::vector<double>&, double) { return dt; },
      [](const std::vector<double>& x, double, std::vector<double>& k) { k[0] = -x[0]; });
  EXPECT_TRUE(res.completed);
  return std::abs(u[0] - std::exp(-1.0));
}

}  // namespace

TEST(Tint, CoefficientsConsistent) {
  const auto s = tint::low_storage_rk45();
  ASSERT_EQ(s.stages(), 5u);
  EXPECT_EQ(s.a[0], 0.0);
  EXPECT_EQ(s.c[0], 0.0);
  /// c_s equals the accumulated b of the previous stages in 2N form
  double acc_c = 0.0, acc_a = 0.0;
  for (std::size_t i = 1; i < s.stages(); ++i) {
    acc_a = s.a[i - 1] * acc_a + 1.0;
    acc_c += s.b[i - 1] * acc_a;
    EXPECT_NEAR(s.c[i], acc_c, 1e-12) << i;
  }
}

TEST(Tint, LinearDecay) {
  EXPECT_LT(decay_error(0.1), 5e-7);
}

TEST(Tint, FourthOrder) {
  const double e1 = decay_error(0.1), e2 = decay_error(0.05);
  const double order = std::log2(e1 / e2);
  EXPECT_NEAR(order, 4.0, 0.1) << e1 << " " << e2;
}

TEST(Tint, ZeroRhsIsIdentity) {
  std::vector<double> u{0.1, 1.0 / 3.0, -7.25e-3};
  const auto copy = u;
  const auto next = tint::rk_step(u, 0.0, 0.37, tint::low_storage_rk45(),
                                  [](const auto&, double, std::vector<double>& k) {
                                    for (auto& x : k) x = 0.0;
                                  });
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(next[i], copy[i]);
}

TEST(Tint, HookSeesEveryStage) {
  std::vector<double> u{1.0};
  std::vector<std::size_t> stages;
  std::vector<double> times;
  tint::rk_step(
      u, 0.0, 0.1, tint::low_storage_rk45(),
      [](const auto& x, double, std::vector<double>& k) { k[0] = -x[0]; },
      [&](const tint::StageInfo& info, std::vector<double>&) {
        stages.push_back(info.stage);
        times.push_back(info.t);
        EXPECT_EQ(info.dt, 0.1);
      });
  ASSERT_EQ(stages.size(), 5u);
  const auto scheme = tint::low_storage_rk45();
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(stages[i], i);
    EXPECT_DOUBLE_EQ(times[i], 0.1 * scheme.c[i]);
  }
}

TEST(Tint, RetriesWithHalvedStep) {
  std::vector<double> u{1.0};
  std::vector<double> dts;
  double base = 1.0;
  /// a stage may grow u by at most 6 percent over the last accepted state
  auto res = tint::advance(
      u, 0.0, 0.2, tint::low_storage_rk45(),
      [](const std::vector<double>&, double) { return 0.2; },
      [](const std::vector<double>& x, double, std::vector<double>& k) { k[0] = x[0]; },
      tint::NoHook{}, [&](const std::vector<double>& x) { return x[0] < 1.06 * base; },
      [&](std::size_t, double, double dt, const std::vector<double>& x) {
        dts.push_back(dt);
        base = x[0];
      });
  EXPECT_TRUE(res.completed);
  EXPECT_GT(res.retries, 0u);
  EXPECT_NEAR(u[0], std::exp(0.2), 1e-8);
  for (double dt : dts) EXPECT_LT(dt, 0.2);
}

TEST(Tint, PersistentFailureKeepsLastState) {
  std::vector<double> u{1.0};
  auto res = tint::advance(
      u, 0.0, 1.0, tint::low_storage_rk45(),
      [](const std::vector<double>&, double) { return 0.1; },
      [](const std::vector<double>&, double, std::vector<double>& k) { k[0] = 1.0; },
      tint::NoHook{}, [](const std::vector<double>& x) { return x[0] < 1.3; });
  EXPECT_FALSE(res.completed);
  EXPECT_FALSE(res.failure.empty());
  EXPECT_LT(u[0], 1.3);
  EXPECT_NEAR(u[0], 1.0 + res.t, 1e-12);
}

TEST(Tint, FinalStepClipped) {
  std::vector<double> u{0.0};
  double last_t = 0.0;
  auto res = tint::advance(
      u, 0.0, 1.0, tint::low_storage_rk45(),
      [](const std::vector<double>&, double) { return 0.3; },
      [](const std::vector<double>&, double, std::vector<double>& k) { k[0] = 1.0; },
      tint::NoHook{}, tint::AlwaysAdmissible{},
      [&](std::size_t, double t, double, const std::vector<double>&) { last_t = t; });
  EXPECT_EQ(res.steps, 4u);
  EXPECT_EQ(last_t, 1.0);
  EXPECT_NEAR(u[0], 1.0, 1e-14);
}
