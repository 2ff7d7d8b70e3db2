#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iostab/excite.hpp"
#include "iostab/filterbank.hpp"
#include "iostab/oracle.hpp"
#include "iostab/scenario.hpp"
#include "iostab/synth.hpp"

namespace iostab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitRankGate = 2,
  kExitInfeasible = 3,
  kExitVerify = 4,
};

struct OracleReport {
  FilteredDynamicsOracle dynamics;
  FilterIdentityResidual filter_identity;
  double annihilation = 0.0;  // max |E_N W_N|
  double annihilation_scale = 0.0;  // ||x0||
  std::optional<double> af_bf_rel_error;
  std::optional<double> spectrum_gap;
  DecompositionReport decomposition;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string status;  // ok | config-error | rank-failure | infeasible | unstable | excitation-failure
  std::string message;
  Scenario scenario;

  bool pathology_free = false;
  bool resonance_free = false;
  ExcitationPlan plan;
  ExperimentRecord record;
  Annihilator annihilator;
  FilteredData filtered;
  RankGate gate;
  std::optional<SynthesisResult> synthesis;
  std::optional<StabilityReport> stability;
  std::optional<OracleReport> oracle;
  // True once the record, annihilator and filtered data are populated.
  bool has_data = false;
};

/// Algorithm steps end to end, no file output. Never throws for scenario
/// problems; they are reported through exit_code/message.
RunResult execute_run(const Scenario& sc);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct VerifyResult {
  int exit_code = kExitOk;
  RunResult run;
  std::vector<VerifyCheck> checks;
};

/// Oracle-backed checks on a test-mode run: filter identity residual (with the
/// optional A_f fault), annihilation, data identity, decomposition, loop
/// spectrum relation, reachability.
VerifyResult execute_verify(const Scenario& sc);

struct SweepRow {
  double value = 0.0;
  int exit_code = 0;
  std::string status;
  bool gate_passed = false;
  int rank = 0;
  int target = 0;
  double condition = 0.0;
  double margin = 0.0;
  double max_re_loop = 0.0;
  bool pathology_free = false;
  std::string message;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRow> rows;
  double gate_pass_rate() const;
  double feasible_rate() const;
};

SweepResult execute_sweep(const Scenario& sc, const std::string& axis, const std::vector<double>& values);

// Artifact writers. JSON reports keep wall-clock data under "meta" only.
nlohmann::ordered_json synthesis_json(const RunResult& run);
nlohmann::ordered_json verify_json(const VerifyResult& ver);
std::string summary_text(const RunResult& run);
std::string sweep_summary_text(const SweepResult& sweep);

void write_run_artifacts(const RunResult& run, const std::string& dir);
void write_verify_artifacts(const VerifyResult& ver, const std::string& dir);
void write_sweep_artifacts(const SweepResult& sweep, const Scenario& sc, const std::string& dir);

/// Adds the "meta" block (timestamp, output directory, thread cap).
void stamp_meta(nlohmann::ordered_json& doc, const std::string& dir);

}  // namespace iostab
