// iostab command-line front end: run, verify, sweep, demo.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "iostab/error.hpp"
#include "iostab/pipeline.hpp"
#include "iostab/scenario.hpp"

namespace {

std::string pick_dir(const std::string& flag, const iostab::Scenario& sc) { return flag.empty() ? sc.out_dir : flag; }

int report_run(const iostab::RunResult& run, const std::string& dir) {
  iostab::write_run_artifacts(run, dir);
  std::cout << iostab::summary_text(run);
  if (run.exit_code != iostab::kExitOk) std::cerr << run.message << "\n";
  return run.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Output-feedback stabilization from filtered input-output data"};
  app.require_subcommand(1);
  std::string out_flag;
  app.add_option("--out", out_flag, "Output directory (overrides [output] dir)");

  std::string cfg;
  auto* run = app.add_subcommand("run", "Simulate, filter, gate, solve the LMI and export artifacts");
  run->add_option("config", cfg, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_flag, "Output directory");

  auto* verify = app.add_subcommand("verify", "Model-based checks of a scenario (exit 4 on any failure)");
  verify->add_option("config", cfg, "Scenario file")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out_flag, "Output directory");

  std::string axis;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario across one axis and aggregate");
  sweep->add_option("config", cfg, "Scenario file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "name=v1,v2,... or name=start:stop:step (seed, Ts, N, order, beta, amplitude)")
      ->required();
  sweep->add_option("--out", out_flag, "Output directory");

  std::string which = "siso";
  auto* demo = app.add_subcommand("demo", "Run a built-in scenario");
  demo->add_option("which", which, "siso or mimo")->check(CLI::IsMember({"siso", "mimo"}));
  demo->add_option("--out", out_flag, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto sc = iostab::load_scenario(cfg);
      return report_run(iostab::execute_run(sc), pick_dir(out_flag, sc));
    }
    if (*demo) {
      const auto sc = iostab::demo_scenario(which);
      return report_run(iostab::execute_run(sc), out_flag.empty() ? "out/demo-" + which : out_flag);
    }
    if (*verify) {
      const auto sc = iostab::load_scenario(cfg);
      const auto ver = iostab::execute_verify(sc);
      iostab::write_verify_artifacts(ver, pick_dir(out_flag, sc));
      for (const auto& c : ver.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << "  threshold=" << c.threshold
                  << "\n";
      }
      if (ver.exit_code != iostab::kExitOk) std::cerr << ver.run.message << "\n";
      return ver.exit_code;
    }
    if (*sweep) {
      const auto eq = axis.find('=');
      if (eq == std::string::npos) throw iostab::Error(iostab::ErrorKind::kConfig, "--axis must be name=values");
      const auto sc = iostab::load_scenario(cfg);
      const auto values = iostab::parse_axis_values(axis.substr(eq + 1));
      const auto result = iostab::execute_sweep(sc, axis.substr(0, eq), values);
      iostab::write_sweep_artifacts(result, sc, pick_dir(out_flag, sc));
      std::cout << iostab::sweep_summary_text(result);
      return iostab::kExitOk;
    }
  } catch (const iostab::Error& e) {
    std::cerr << e.what() << "\n";
    return iostab::kExitConfig;
  }
  return iostab::kExitOk;
}
