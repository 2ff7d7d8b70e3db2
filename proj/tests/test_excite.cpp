#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "iostab/error.hpp"
#include "iostab/excite.hpp"
#include "iostab/filterbank.hpp"
#include "test_support.hpp"

namespace iostab {
namespace {

using testing::max_abs;

std::vector<Vec> scalars(std::initializer_list<double> v) {
  std::vector<Vec> out;
  for (double x : v) out.push_back(Vec::Constant(1, x));
  return out;
}

// Rows e_n^T (e^{A_r^T t_k} - e^{-beta t_k} I) x0 for every filter coordinate:
// the disturbance samples the annihilator has to cancel.
Mat disturbance_rows(const FilterSpec& spec, const std::vector<double>& times, const Vec& x0) {
  const Mat art = build_companion(spec).a_r.transpose();
  const int n = spec.n();
  Mat e(n, static_cast<Eigen::Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    e.col(static_cast<Eigen::Index>(k)) = (mat_exp(art * t) - std::exp(-spec.beta() * t) * Mat::Identity(n, n)) * x0;
  }
  return e;
}

std::vector<double> grid(double ts, int samples) {
  std::vector<double> t;
  for (int k = 1; k <= samples; ++k) t.push_back(k * ts);
  return t;
}

TEST(PeOrder, Examples) {
  EXPECT_TRUE(check_pe_order(scalars({3, 3, 3, 3}), 1));
  EXPECT_FALSE(check_pe_order(scalars({3, 3, 3, 3}), 2));
  EXPECT_TRUE(check_pe_order(scalars({1, 2, 3, 4}), 2));
  EXPECT_FALSE(check_pe_order(scalars({1, 1, 1, 1}), 2));
  EXPECT_FALSE(check_pe_order(scalars({0, 0, 0}), 1));
  EXPECT_EQ(achieved_pe_order(scalars({1, 1, 1, 1})), 1);
}

TEST(PeSequence, UniformCertifies) {
  PeRequest req;
  req.seed = 5;
  req.m = 1;
  req.order = 6;
  req.length = 40;
  const auto plan = gen_pe_sequence(req);
  EXPECT_EQ(plan.certified_order, 6);
  EXPECT_EQ(plan.d.size(), 40u);
  EXPECT_TRUE(check_pe_order(plan.d, 6));
}

TEST(PeSequence, SeedReproducible) {
  PeRequest req;
  req.seed = 77;
  req.m = 2;
  req.order = 10;
  req.length = 60;
  req.certify_from = 1;
  const auto a = gen_pe_sequence(req);
  const auto b = gen_pe_sequence(req);
  ASSERT_EQ(a.d.size(), b.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) EXPECT_EQ(a.d[k], b.d[k]);
  EXPECT_EQ(a.certified_order, b.certified_order);
  req.seed = 78;
  EXPECT_NE(gen_pe_sequence(req).d[0], a.d[0]);
}

TEST(PeSequence, ConstantIsOnlyOrderOne) {
  PeRequest req;
  req.m = 1;
  req.order = 6;
  req.length = 40;
  req.kind = ExcitationKind::kConstant;
  EXPECT_EQ(gen_pe_sequence(req).certified_order, 1);
}

TEST(PeSequence, TooShortIsExcitationFailure) {
  PeRequest req;
  req.m = 1;
  req.order = 6;
  req.length = 8;
  try {
    gen_pe_sequence(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kExcitation);
  }
}

TEST(Pathology, Examples) {
  EXPECT_TRUE(check_sampling_pathology({-1.0, -2.0, -3.5}, 0.1));
  const std::vector<Complex> pair{Complex(0, std::numbers::pi), Complex(0, -std::numbers::pi)};
  EXPECT_FALSE(check_sampling_pathology(pair, 1.0));
  EXPECT_TRUE(check_sampling_pathology(pair, 0.7));
}

TEST(Defaults, CountsForRecipe) {
  EXPECT_EQ(default_pe_order(1, 1, 1), 6);
  EXPECT_EQ(default_pe_order(3, 1, 1), 14);
  EXPECT_EQ(default_pe_order(2, 2, 2), 20);
  EXPECT_GE(default_sample_count(1, 1, 1), 12);
  EXPECT_GE(default_sample_count(3, 1, 1), 28);
}

TEST(UniformAnnihilator, FirstOrderCoefficients) {
  const FilterSpec spec({2.0}, 1.0, 1, 1);
  const auto fir = annihilator_fir(spec, 0.1);
  ASSERT_EQ(fir.size(), 3u);
  EXPECT_NEAR(fir[0], 1.0, 1e-15);
  EXPECT_NEAR(fir[1], -(std::exp(-0.1) + std::exp(-0.2)), 1e-14);
  EXPECT_NEAR(fir[2], std::exp(-0.3), 1e-14);
  EXPECT_NEAR(fir[1], -1.723568, 1e-6);
  EXPECT_NEAR(fir[2], 0.740818, 1e-6);
}

TEST(UniformAnnihilator, ZeroBetaHasUnitRoot) {
  const FilterSpec spec({3.0, 2.0}, 0.0, 1, 1);
  const auto fir = annihilator_fir(spec, 0.2);
  double at_one = 0.0;
  for (double w : fir) at_one += w;
  EXPECT_NEAR(at_one, 0.0, 1e-14);
}

TEST(UniformAnnihilator, ShapeAndRank) {
  const FilterSpec spec({3.0, 2.0}, 1.5, 1, 1);
  const auto single = build_w_uniform(spec, 0.1, 4);
  EXPECT_EQ(single.rows(), 4);
  EXPECT_EQ(single.nbar(), 1);
  const auto w = build_w_uniform(spec, 0.1, 30);
  EXPECT_EQ(w.nbar(), 27);
  EXPECT_EQ(numerical_rank(w.w), 27);
  // Column j holds the reversed taps starting at row j.
  EXPECT_NEAR(w.w(0, 0), w.fir.back(), 0.0);
  EXPECT_NEAR(w.w(3, 0), w.fir.front(), 0.0);
  EXPECT_EQ(w.w(4, 0), 0.0);
  EXPECT_THROW(build_w_uniform(spec, 0.1, 3), Error);
}

TEST(UniformAnnihilator, CancelsDisturbanceProperty) {
  std::mt19937_64 rng(301);
  for (int trial = 0; trial < 20; ++trial) {
    const FilterSpec spec(trial % 2 ? std::vector<double>{3.0, 2.0} : std::vector<double>{6.0, 11.0, 6.0}, 1.2, 1, 1);
    const Vec x0 = testing::random_mat(rng, spec.n(), 1);
    const auto times = grid(0.1, 40);
    const auto w = build_w_uniform(spec, 0.1, 40);
    EXPECT_LE(max_abs(disturbance_rows(spec, times, x0) * w.w), 1e-12 * (1.0 + x0.norm()));
  }
}

TEST(GeneralAnnihilator, FirstOrderNullity) {
  const FilterSpec spec({2.0}, 1.0, 1, 1);
  const std::vector<double> times{0.05, 0.2, 0.3, 0.55, 0.6, 0.9};
  const auto w = build_w_general(spec, times);
  EXPECT_EQ(w.nbar(), 5);
  EXPECT_LE(max_abs(disturbance_rows(spec, times, Vec::Ones(1)) * w.w), 1e-13);
}

TEST(GeneralAnnihilator, ContainsUniformSpan) {
  const FilterSpec spec({3.0, 2.0}, 1.5, 1, 1);
  const auto times = grid(0.1, 20);
  const auto g = build_w_general(spec, times);
  const auto u = build_w_uniform(spec, 0.1, 20);
  EXPECT_EQ(g.nbar(), 18);
  EXPECT_EQ(u.nbar(), 17);
  const Mat q = g.w.householderQr().householderQ() * Mat::Identity(20, g.nbar());
  EXPECT_LE(max_abs(u.w - q * (q.transpose() * u.w)), 1e-9);
}

TEST(GeneralAnnihilator, RejectsUnorderedTimes) {
  const FilterSpec spec({2.0}, 1.0, 1, 1);
  const std::vector<double> times{0.3, 0.2, 0.4};
  EXPECT_THROW(build_w_general(spec, times), Error);
}

TEST(ApplyAnnihilator, IdentityLeavesData) {
  std::mt19937_64 rng(302);
  Annihilator id;
  id.w = Mat::Identity(6, 6);
  const Mat m = testing::random_mat(rng, 3, 6);
  EXPECT_EQ(apply_annihilator(m, id), m);
}

TEST(ApplyAnnihilator, StreamingMatchesToeplitz) {
  std::mt19937_64 rng(303);
  const FilterSpec spec({6.0, 11.0, 6.0}, 0.8, 1, 1);
  const auto w = build_w_uniform(spec, 0.07, 50);
  const Mat m = testing::random_mat(rng, 4, 50);
  EXPECT_LE(max_abs(apply_annihilator(m, w) - apply_fir_streaming(m, w)), 1e-12);
}

}  // namespace
}  // namespace iostab
