#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "iostab/error.hpp"
#include "iostab/pipeline.hpp"
#include "iostab/scenario.hpp"

namespace iostab {
namespace {

std::string without_meta(const RunResult& run) {
  auto doc = synthesis_json(run);
  doc.erase("meta");
  return doc.dump(2);
}

TEST(Scenario, ParsesSisoShorthandAndSections) {
  const auto sc = parse_scenario(
      "name = t\n[plant]\nn = 2\na = 3, 2\nb = 0 1\nx0 = 0.5, -0.5\n[filter]\nc = 3, 2\nbeta = 1.5\n"
      "[excitation]\nseed = 9\nTs = 0.2\nN = 40\n[annihilator]\nroute = general-nullspace\n"
      "[policy]\nlmi_max_newton = 500\n[run]\nparallel = false\n");
  EXPECT_EQ(sc.name, "t");
  EXPECT_EQ(sc.n, 2);
  EXPECT_EQ(sc.a_coef[1](0, 0), 2.0);
  EXPECT_EQ(sc.b_coef[0](0, 0), 0.0);
  EXPECT_EQ(sc.c, (std::vector<double>{3.0, 2.0}));
  EXPECT_EQ(sc.seed, 9u);
  EXPECT_EQ(sc.samples, 40);
  EXPECT_EQ(sc.route, AnnihilatorRoute::kGeneralNullspace);
  EXPECT_EQ(sc.policy.lmi_max_newton, 500);
  EXPECT_FALSE(sc.parallel);
  ASSERT_TRUE(sc.x0.has_value());
  EXPECT_EQ((*sc.x0)(1), -0.5);
}

TEST(Scenario, FormatRoundTrips) {
  for (const char* which : {"siso", "mimo"}) {
    const auto sc = demo_scenario(which);
    const auto back = parse_scenario(format_scenario(sc));
    EXPECT_EQ(format_scenario(back), format_scenario(sc)) << which;
    EXPECT_EQ(scenario_echo(back).dump(), scenario_echo(sc).dump()) << which;
  }
}

TEST(Scenario, MalformedKeysAreConfigErrors) {
  for (const char* text : {"[plant]\nn = 1\na = x\nb = 1\n[filter]\nc = 1\n",
                           "[plant]\nn = 1\na = 1\n[filter]\nc = 1\n",
                           "[plant]\nn = 1\na = 1\nb = 1\n[filter]\nc = 1\n[annihilator]\nroute = nope\n",
                           "[plant]\nn = 2\nm = 2\np = 2\nA1 = 1, 2\n"}) {
    try {
      parse_scenario(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    }
  }
}

TEST(Scenario, AxisParsing) {
  EXPECT_EQ(parse_axis_values("1,2,5"), (std::vector<double>{1, 2, 5}));
  const auto r = parse_axis_values("0.1:0.5:0.1");
  ASSERT_EQ(r.size(), 5u);
  EXPECT_NEAR(r.back(), 0.5, 1e-12);
  Scenario sc;
  EXPECT_THROW(set_axis(sc, "gamma", 1.0), Error);
  set_axis(sc, "N", 30);
  EXPECT_EQ(sc.samples, 30);
}

TEST(Scenario, DefaultX0IsSeedDeterministic) {
  auto sc = demo_scenario("mimo");
  sc.x0.reset();
  const Vec a = sc.resolved_x0();
  EXPECT_EQ(a, sc.resolved_x0());
  EXPECT_EQ(a.size(), 4);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Run, DemoSisoStabilizes) {
  const auto run = execute_run(demo_scenario("siso"));
  ASSERT_EQ(run.exit_code, kExitOk) << run.message;
  EXPECT_LT(run.stability->max_re_loop, -1e-7);
  EXPECT_LT(run.stability->max_re_filtered, -1e-7);
}

TEST(Run, ConstantInputFailsGate) {
  auto sc = demo_scenario("siso");
  sc.kind = ExcitationKind::kConstant;
  const auto run = execute_run(sc);
  EXPECT_EQ(run.exit_code, kExitRankGate);
  EXPECT_EQ(run.status, "rank-failure");
  EXPECT_NE(run.message.find("FAILURE: rank(col(Phi_bar, Upsilon_bar))"), std::string::npos);
}

TEST(Run, InadmissibleBetaIsConfigError) {
  auto sc = demo_scenario("siso");
  sc.beta = sc.c[0];
  const auto run = execute_run(sc);
  EXPECT_EQ(run.exit_code, kExitConfig);
  EXPECT_FALSE(run.has_data);
}

TEST(Run, GeneralRouteAlsoStabilizes) {
  auto sc = demo_scenario("siso");
  sc.route = AnnihilatorRoute::kGeneralNullspace;
  const auto run = execute_run(sc);
  EXPECT_EQ(run.exit_code, kExitOk) << run.message;
  EXPECT_EQ(run.annihilator.nbar(), run.annihilator.rows() - sc.n);
}

TEST(Run, ByteIdenticalReportsForSameSeed) {
  for (const char* which : {"siso", "mimo"}) {
    const auto sc = demo_scenario(which);
    EXPECT_EQ(without_meta(execute_run(sc)), without_meta(execute_run(sc))) << which;
    auto serial = sc;
    serial.parallel = false;
    const auto a = execute_run(sc);
    const auto b = execute_run(serial);
    ASSERT_TRUE(a.synthesis && b.synthesis);
    EXPECT_LE((a.synthesis->k_f - b.synthesis->k_f).cwiseAbs().maxCoeff(),
              1e-6 * (1.0 + a.synthesis->k_f.cwiseAbs().maxCoeff()))
        << which;
  }
}

TEST(Verify, DemosPassAndFaultIsCaught) {
  for (const char* which : {"siso", "mimo"}) {
    const auto ver = execute_verify(demo_scenario(which));
    EXPECT_EQ(ver.exit_code, kExitOk) << which;
    for (const auto& c : ver.checks) EXPECT_TRUE(c.passed) << which << " " << c.name;
  }
  auto sc = demo_scenario("siso");
  sc.fault_af = 1e-3;
  const auto ver = execute_verify(sc);
  EXPECT_EQ(ver.exit_code, kExitVerify);
  for (const auto& c : ver.checks) EXPECT_EQ(c.passed, c.name != "filter_identity_residual") << c.name;
}

TEST(Sweep, SeedCampaignAndPathologyFlag) {
  const auto seeds = execute_sweep(demo_scenario("siso"), "seed", parse_axis_values("1:20:1"));
  EXPECT_EQ(seeds.rows.size(), 20u);
  EXPECT_EQ(seeds.gate_pass_rate(), 1.0);

  // Poles at +-i pi: Ts = 1 aliases them onto each other.
  auto osc = demo_scenario("siso");
  osc.n = 2;
  osc.a_coef = {Mat::Zero(1, 1), Mat::Constant(1, 1, std::numbers::pi * std::numbers::pi)};
  osc.b_coef = {Mat::Ones(1, 1), Mat::Ones(1, 1)};
  osc.c = {3.0, 2.0};
  osc.beta = 1.5;
  osc.x0.reset();
  const auto ts = execute_sweep(osc, "Ts", {0.9, 1.0, 1.1});
  EXPECT_TRUE(ts.rows[0].pathology_free);
  EXPECT_FALSE(ts.rows[1].pathology_free);
  EXPECT_TRUE(ts.rows[2].pathology_free);
}

TEST(Artifacts, RunFilesWritten) {
  const auto dir = std::filesystem::temp_directory_path() / "iostab_artifacts_test";
  std::filesystem::remove_all(dir);
  write_run_artifacts(execute_run(demo_scenario("siso")), dir.string());
  for (const char* f : {"trajectory.csv", "annihilator.csv", "annihilator.json", "excitation.csv", "synthesis.json",
                        "summary.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::ifstream in(dir / "synthesis.json");
  const auto doc = nlohmann::json::parse(in);
  EXPECT_EQ(doc["status"], "ok");
  EXPECT_EQ(doc["K_f"]["rows"], 1);
  EXPECT_TRUE(doc.contains("meta"));
  EXPECT_TRUE(doc.contains("config_echo"));
}

}  // namespace
}  // namespace iostab
