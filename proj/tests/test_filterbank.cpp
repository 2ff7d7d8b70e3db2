#include <gtest/gtest.h>

#include <cmath>

#include "iostab/error.hpp"
#include "iostab/filterbank.hpp"
#include "test_support.hpp"

namespace iostab {
namespace {

using testing::max_abs;

TEST(Companion, Examples) {
  const auto one = build_companion(FilterSpec({2.0}, 1.0, 1, 1));
  EXPECT_EQ(one.a_r(0, 0), -2.0);
  EXPECT_EQ(one.b_r(0, 0), 1.0);

  const auto two = build_companion(FilterSpec({3.0, 2.0}, 1.5, 1, 1));
  Mat a(2, 2);
  a << 0, 1, -2, -3;
  EXPECT_EQ(two.a_r, a);
  EXPECT_EQ(two.b_r, Mat(Eigen::Vector2d(0, 1)));

  const auto wide = build_companion(FilterSpec({2.0}, 1.0, 2, 1));
  EXPECT_EQ(wide.a_rm, -2.0 * Mat::Identity(2, 2));
  EXPECT_EQ(wide.b_rm, Mat::Identity(2, 2));
  EXPECT_EQ(wide.a_rp, one.a_r);
}

TEST(FilterSpecCtor, RejectsBetaRootOfQr) {
  try {
    FilterSpec({2.0}, 2.0, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAssumption);
  }
}

TEST(ExperimentSystem, DimensionsAndOrigin) {
  const auto plant = realize_observability_canonical(DiffOpModel::siso({-1.0}, {1.0}));
  const FilterSpec spec({1.0}, 2.0, 1, 1);
  const auto aug = assemble_experiment_system(plant, spec);
  EXPECT_EQ(aug.layout.states(), 6);
  std::vector<Vec> zeros(10, Vec::Zero(1));
  const auto rec = simulate_experiment(plant, spec, Vec::Zero(1), zeros, 0.1);
  EXPECT_EQ(max_abs(rec.phi), 0.0);
  EXPECT_EQ(max_abs(rec.delta), 0.0);
  EXPECT_EQ(max_abs(rec.y), 0.0);
}

TEST(ExperimentSystem, DeltaStartsAtZero) {
  const auto plant = realize_observability_canonical(DiffOpModel::siso({0.5, 2.0}, {1.0, 1.0}));
  const FilterSpec spec({3.0, 2.0}, 1.5, 1, 1);
  std::vector<Vec> inputs(12, Vec::Constant(1, 0.8));
  const auto rec = simulate_experiment(plant, spec, Eigen::Vector2d(1.0, -2.0), inputs, 0.1);
  EXPECT_EQ(max_abs(rec.delta.col(0)), 0.0);
  EXPECT_EQ(max_abs(rec.phi.col(0)), 0.0);
  EXPECT_GT(max_abs(rec.y.col(0)), 0.0);
}

TEST(ExperimentSystem, DeltaIsDerivativeOfPhi) {
  // phi' = -beta phi + chi = delta; a central difference on a fine grid agrees
  // to second order.
  const auto plant = realize_observability_canonical(DiffOpModel::siso({1.0, 2.0}, {0.5, 1.0}));
  const FilterSpec spec({3.0, 2.0}, 1.5, 1, 1);
  const double ts = 1e-3;
  std::vector<Vec> inputs(400, Vec::Constant(1, 1.0));
  const auto rec = simulate_experiment(plant, spec, Eigen::Vector2d(0.3, 0.1), inputs, ts);
  for (int k = 100; k < 300; k += 37) {
    const Vec fd = (rec.phi.col(k + 1) - rec.phi.col(k - 1)) / (2 * ts);
    EXPECT_LE((fd - rec.delta.col(k)).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Zoh, IntegratorAndDecay) {
  Mat zero = Mat::Zero(1, 1), one = Mat::Ones(1, 1);
  const auto [ad, bd] = discretize_zoh(zero, one, 0.5);
  EXPECT_NEAR(ad(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(bd(0, 0), 0.5, 1e-15);
  double x = 0.0;
  for (int k = 1; k <= 5; ++k) {
    x = ad(0, 0) * x + bd(0, 0);
    EXPECT_NEAR(x, 0.5 * k, 1e-14);
  }
  const auto [ad2, bd2] = discretize_zoh(-one, zero, 0.3);
  EXPECT_NEAR(ad2(0, 0), std::exp(-0.3), 1e-15);
  EXPECT_EQ(bd2(0, 0), 0.0);
}

TEST(Controller, ZeroGainAndSize) {
  const FilterSpec spec({1.0}, 2.0, 1, 1);
  const auto ctrl = build_controller(spec, Mat::Zero(1, 2));
  EXPECT_EQ(ctrl.a.rows(), 2);
  EXPECT_EQ(max_abs(ctrl.c), 0.0);
  EXPECT_LT(max_real_eig(ctrl.a), 0.0);
}

TEST(ClosedLoop, Examples) {
  const FilterSpec spec({1.0}, 2.0, 1, 1);
  const auto stable = realize_observability_canonical(DiffOpModel::siso({1.0}, {1.0}));
  EXPECT_LT(max_real_eig(closed_loop_matrix(stable, build_controller(spec, Mat::Zero(1, 2)))), 0.0);

  const auto unstable = realize_observability_canonical(DiffOpModel::siso({-1.0}, {1.0}));
  EXPECT_GT(max_real_eig(closed_loop_matrix(unstable, build_controller(spec, Mat::Zero(1, 2)))), 0.0);

  // Hand-assembled loop [[1,-1,-3],[0,-2,-3],[1,0,-1]]: eigenvalues -1 and
  // -1/2 +- i sqrt(3)/2, i.e. (s+1)(s^2+s+1).
  const Mat loop = closed_loop_matrix(unstable, build_controller(spec, Mat(Eigen::RowVector2d(-1.0, -3.0))));
  const std::vector<Complex> expect{Complex(-1.0, 0.0), Complex(-0.5, std::sqrt(3.0) / 2), Complex(-0.5, -std::sqrt(3.0) / 2)};
  EXPECT_LE(multiset_distance(spectrum(loop).values, expect), 1e-12);
}

}  // namespace
}  // namespace iostab
