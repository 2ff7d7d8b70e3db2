#include "iostab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iostab/error.hpp"
#include "iostab/parallel.hpp"

namespace iostab {

namespace {

int exit_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kExcitation:
    case ErrorKind::kConditioning:
      return kExitRankGate;
    case ErrorKind::kSolver:
    case ErrorKind::kInfeasible:
      return kExitInfeasible;
    default:
      return kExitConfig;
  }
}

const char* status_for(int code) {
  switch (code) {
    case kExitConfig:
      return "config-error";
    case kExitRankGate:
      return "rank-failure";
    case kExitInfeasible:
      return "infeasible";
    default:
      return "ok";
  }
}

bool resonance_free(const DiffOpModel& model, const StateSpace& ss, const FilterSpec& spec,
                    const NumericPolicy& policy) {
  if (model.is_siso()) return check_c_nonresonant(model.denominator(), spec.q_r(), spec.beta(), policy);
  std::vector<Complex> others = spectrum(companion_bottom(spec.c())).values;
  others.emplace_back(-spec.beta(), 0.0);
  double size = 1.0;
  const auto plant_eigs = spectrum(ss.a).values;
  for (const auto& z : plant_eigs) size = std::max(size, std::abs(z));
  for (const auto& z : plant_eigs) {
    for (const auto& w : others) {
      if (std::abs(z - w) <= 1e-8 * size) return false;
    }
  }
  return true;
}

void run_steps(const Scenario& sc, RunResult& res) {
  const NumericPolicy& pol = sc.policy;
  const DiffOpModel model = sc.model();
  const std::string violation = plant_assumption_violation(model, pol);
  if (!violation.empty()) throw Error(ErrorKind::kAssumption, "plant: " + violation);
  const FilterSpec spec(sc.c, sc.beta, sc.m, sc.p, pol);
  const StateSpace ss = realize_observability_canonical(model);
  const Vec x0 = sc.resolved_x0();
  if (x0.size() != ss.states()) throw Error(ErrorKind::kConfig, "plant: x0 must have p * n entries");

  res.pathology_free = check_sampling_pathology(pathology_points(ss.a, spec), sc.ts, pol.pathology_tol);
  res.resonance_free = resonance_free(model, ss, spec, pol);

  const int samples = sc.resolved_samples();
  PeRequest req;
  req.seed = sc.seed;
  req.m = sc.m;
  req.order = sc.resolved_pe_order();
  req.length = samples;
  req.amplitude = sc.amplitude;
  req.ts = sc.ts;
  req.certify_from = 1;
  req.kind = sc.kind;
  res.plan = gen_pe_sequence(req, pol);

  res.record = simulate_experiment(ss, spec, x0, res.plan.d, sc.ts);
  if (sc.route == AnnihilatorRoute::kUniformFir) {
    res.annihilator = build_w_uniform(spec, sc.ts, samples);
  } else {
    std::vector<double> times(res.record.t.begin() + 1, res.record.t.end());
    res.annihilator = build_w_general(spec, times, pol);
  }
  const DataMatrices dm = assemble_data_matrices(res.record);
  res.filtered = filter_data(dm, res.annihilator);
  res.has_data = true;

  if (sc.test_mode) {
    OracleReport orc;
    orc.dynamics = build_filtered_dynamics(model, spec, pol);
    const Mat eps = epsilon_trajectory(spec, orc.dynamics, x0, res.record.t);
    orc.filter_identity = check_filter_identity_residual(res.record, orc.dynamics, eps, pol);
    const Mat e_n = eps.rightCols(samples) * res.annihilator.w;
    orc.annihilation = e_n.size() ? e_n.cwiseAbs().maxCoeff() : 0.0;
    orc.annihilation_scale = x0.norm();
    orc.decomposition = verify_interconnection_decomposition(model, spec, pol);
    res.oracle = orc;
  }

  res.gate = rank_gate(res.filtered, sc.n, sc.m, sc.p, pol);
  if (!res.gate.passed) {
    res.exit_code = kExitRankGate;
    res.status = "rank-failure";
    res.message = "FAILURE: rank(col(Phi_bar, Upsilon_bar)) = " + std::to_string(res.gate.rank) + ", need " +
                  std::to_string(res.gate.target) + "; synthesis aborted (" + res.gate.diagnostic() + ")";
    return;
  }
  if (res.oracle) {
    const auto [a_est, b_est] = estimate_af_bf(res.filtered, res.gate, pol);
    Mat est(a_est.rows(), a_est.cols() + b_est.cols());
    est << a_est, b_est;
    Mat truth(est.rows(), est.cols());
    truth << res.oracle->dynamics.a_f, res.oracle->dynamics.b_f;
    res.oracle->af_bf_rel_error = (est - truth).norm() / truth.norm();
  }

  res.synthesis = solve_stabilization_lmi(res.filtered, pol, sc.parallel);
  if (res.synthesis->status != SynthesisStatus::kFeasible) {
    res.exit_code = kExitInfeasible;
    res.status = "infeasible";
    std::ostringstream msg;
    msg << "LMI infeasible: margin " << res.synthesis->margin << " <= strict tolerance " << res.synthesis->strict_tol;
    res.message = msg.str();
    return;
  }
  std::optional<std::pair<Mat, Mat>> af_bf;
  if (res.oracle) af_bf = std::make_pair(res.oracle->dynamics.a_f, res.oracle->dynamics.b_f);
  res.stability = verify_synthesis(ss, spec, res.synthesis->k_f, af_bf, pol);
  if (res.oracle) res.oracle->spectrum_gap = loop_spectrum_gap(ss, spec, res.oracle->dynamics, res.synthesis->k_f);
  if (!res.stability->passed) {
    res.exit_code = kExitInfeasible;
    res.status = "unstable";
    res.message = "synthesized gain failed the stability check";
    return;
  }
  res.exit_code = kExitOk;
  res.status = "ok";
  res.message = "stabilizing gain found";
}

}  // namespace

RunResult execute_run(const Scenario& sc) {
  RunResult res;
  res.scenario = sc;
  try {
    run_steps(sc, res);
  } catch (const Error& e) {
    res.exit_code = exit_for(e.kind());
    res.status = e.kind() == ErrorKind::kExcitation ? "excitation-failure" : status_for(res.exit_code);
    res.message = e.what();
  }
  return res;
}

VerifyResult execute_verify(const Scenario& sc) {
  VerifyResult ver;
  Scenario forced = sc;
  forced.test_mode = true;
  ver.run = execute_run(forced);
  const RunResult& run = ver.run;
  auto add = [&](std::string name, double value, double threshold, bool passed) {
    ver.checks.push_back({std::move(name), passed, value, threshold});
  };
  if (run.exit_code == kExitConfig || !run.oracle) {
    add("scenario", 1.0, 0.0, false);
    ver.exit_code = kExitConfig;
    return ver;
  }
  const OracleReport& orc = *run.oracle;
  const NumericPolicy& pol = sc.policy;

  FilterIdentityResidual filter_identity = orc.filter_identity;
  if (sc.fault_af != 0.0) {
    FilteredDynamicsOracle faulted = orc.dynamics;
    faulted.a_f(0, 0) += sc.fault_af;
    const FilterSpec spec(sc.c, sc.beta, sc.m, sc.p, pol);
    const Mat eps = epsilon_trajectory(spec, faulted, run.record.x0, run.record.t);
    filter_identity = check_filter_identity_residual(run.record, faulted, eps, pol);
  }
  add("filter_identity_residual", filter_identity.max_residual, filter_identity.threshold, filter_identity.passed);
  const double ann_tol = 1e-9 * std::max(orc.annihilation_scale, std::numeric_limits<double>::min());
  add("annihilation", orc.annihilation, ann_tol, orc.annihilation <= ann_tol);
  add("reachability", orc.dynamics.reach_rank, sc.n * (sc.m + sc.p), orc.dynamics.reachable);
  add("decomposition", orc.decomposition.max_residual, pol.decomposition_tol, orc.decomposition.passed);
  add("rank_gate", run.gate.rank, run.gate.target, run.gate.passed);
  if (orc.af_bf_rel_error) {
    add("data_identity", *orc.af_bf_rel_error, 1e-7, *orc.af_bf_rel_error <= 1e-7);
  }
  if (run.stability) {
    add("stability_filtered", run.stability->max_re_filtered, -pol.stability_tol,
        run.stability->max_re_filtered < -pol.stability_tol);
    add("stability_loop", run.stability->max_re_loop, -pol.stability_tol,
        run.stability->max_re_loop < -pol.stability_tol);
  } else {
    add("synthesis", run.exit_code, 0.0, false);
  }
  if (orc.spectrum_gap) add("loop_spectrum", *orc.spectrum_gap, 1e-7, *orc.spectrum_gap <= 1e-7);

  ver.exit_code = kExitOk;
  for (const auto& c : ver.checks) {
    if (!c.passed) ver.exit_code = kExitVerify;
  }
  return ver;
}

double SweepResult::gate_pass_rate() const {
  if (rows.empty()) return 0.0;
  const auto passed = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.gate_passed; });
  return static_cast<double>(passed) / static_cast<double>(rows.size());
}

double SweepResult::feasible_rate() const {
  if (rows.empty()) return 0.0;
  const auto ok = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.exit_code == kExitOk; });
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

SweepResult execute_sweep(const Scenario& sc, const std::string& axis, const std::vector<double>& values) {
  SweepResult out;
  out.axis = axis;
  out.rows.resize(values.size());
  // Validate the axis name once so a typo is a config error, not N failed cells.
  Scenario probe = sc;
  if (!values.empty()) set_axis(probe, axis, values.front());
  run_cells(
      static_cast<int>(values.size()),
      [&](int i) {
        SweepRow& row = out.rows[static_cast<std::size_t>(i)];
        row.value = values[static_cast<std::size_t>(i)];
        Scenario cell = sc;
        try {
          set_axis(cell, axis, row.value);
        } catch (const Error& e) {
          row.exit_code = kExitConfig;
          row.status = "config-error";
          row.message = e.what();
          return;
        }
        const RunResult run = execute_run(cell);
        row.exit_code = run.exit_code;
        row.status = run.status;
        row.message = run.message;
        row.gate_passed = run.gate.passed;
        row.rank = run.gate.rank;
        row.target = run.gate.target;
        row.condition = run.gate.condition();
        row.pathology_free = run.pathology_free;
        row.margin = run.synthesis ? run.synthesis->margin : std::numeric_limits<double>::quiet_NaN();
        row.max_re_loop = run.stability ? run.stability->max_re_loop : std::numeric_limits<double>::quiet_NaN();
      },
      sc.parallel);
  return out;
}

}  // namespace iostab
