#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iostab/error.hpp"
#include "iostab/parallel.hpp"
#include "iostab/pipeline.hpp"

namespace iostab {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// NaN and infinity are not JSON numbers.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_rows(const Mat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(jnum(a(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json eig_list(const std::vector<Complex>& eigs) {
  json out = json::array();
  for (const auto& z : eigs) out.push_back({{"re", jnum(z.real())}, {"im", jnum(z.imag())}});
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kConfig, "cannot write " + path.string());
  out << text;
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::kConfig, "cannot create output directory " + dir + ": " + ec.message());
  return p;
}

void append_block(std::ostringstream& head, const char* name, Eigen::Index rows) {
  for (Eigen::Index i = 0; i < rows; ++i) head << ',' << name << '_' << i + 1;
}

std::string trajectory_csv(const ExperimentRecord& rec) {
  std::ostringstream out;
  out << 't';
  append_block(out, "u", rec.u.rows());
  append_block(out, "y", rec.y.rows());
  append_block(out, "zeta", rec.zeta.rows());
  append_block(out, "mu", rec.mu.rows());
  append_block(out, "phi", rec.phi.rows());
  append_block(out, "upsilon", rec.upsilon.rows());
  append_block(out, "delta", rec.delta.rows());
  out << '\n';
  for (int k = 0; k < rec.samples(); ++k) {
    out << num(rec.t[static_cast<std::size_t>(k)]);
    for (const Mat* m : {&rec.u, &rec.y, &rec.zeta, &rec.mu, &rec.phi, &rec.upsilon, &rec.delta}) {
      for (Eigen::Index i = 0; i < m->rows(); ++i) out << ',' << num((*m)(i, k));
    }
    out << '\n';
  }
  return out.str();
}

std::string matrix_csv(const Mat& a) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out << (j ? "," : "") << num(a(i, j));
    out << '\n';
  }
  return out.str();
}

std::string excitation_csv(const ExcitationPlan& plan) {
  std::ostringstream out;
  out << 'k';
  if (!plan.d.empty()) append_block(out, "d", plan.d.front().size());
  out << '\n';
  for (std::size_t k = 0; k < plan.d.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < plan.d[k].size(); ++i) out << ',' << num(plan.d[k](i));
    out << '\n';
  }
  return out.str();
}

json annihilator_sidecar(const Annihilator& w) {
  json j;
  j["route"] = to_string(w.route);
  j["n"] = w.n;
  j["beta"] = w.beta;
  j["T_S"] = w.ts;
  j["rows"] = w.rows();
  j["nbar"] = w.nbar();
  j["fir"] = w.fir;
  return j;
}

}  // namespace

void stamp_meta(json& doc, const std::string& dir) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  doc["meta"] = {{"timestamp", buf}, {"out_dir", dir}, {"threads", campaign_threads()}};
}

json synthesis_json(const RunResult& run) {
  json j;
  j["status"] = run.status;
  j["exit_code"] = run.exit_code;
  j["message"] = run.message;
  j["checks"] = {{"pathology_free", run.pathology_free}, {"resonance_free", run.resonance_free}};
  if (run.has_data) {
    j["excitation"] = {{"certified_order", run.plan.certified_order},
                       {"certify_from", run.plan.certify_from},
                       {"attempts", run.plan.attempts}};
    j["annihilator"] = {{"route", to_string(run.annihilator.route)}, {"nbar", run.annihilator.nbar()}};
    json gate;
    gate["passed"] = run.gate.passed;
    gate["rank"] = run.gate.rank;
    gate["target"] = run.gate.target;
    gate["threshold"] = jnum(run.gate.threshold);
    gate["condition"] = jnum(run.gate.condition());
    gate["singular_values"] = json::array();
    for (double s : run.gate.singular_values) gate["singular_values"].push_back(jnum(s));
    j["rank_gate"] = gate;
  }
  if (run.synthesis) {
    const auto& s = *run.synthesis;
    j["margin"] = jnum(s.margin);
    j["solver_margin"] = jnum(s.solver_margin);
    j["strict_tol"] = jnum(s.strict_tol);
    j["radius"] = jnum(s.radius);
    j["solver"] = {{"newton_steps", s.newton_steps}, {"outer_steps", s.outer_steps}};
    if (s.k_f.size()) {
      json data = json::array();
      for (Eigen::Index r = 0; r < s.k_f.rows(); ++r) {
        for (Eigen::Index c = 0; c < s.k_f.cols(); ++c) data.push_back(jnum(s.k_f(r, c)));
      }
      j["K_f"] = {{"rows", s.k_f.rows()}, {"cols", s.k_f.cols()}, {"data", data}};
    } else {
      j["K_f"] = nullptr;
    }
    j["residuals"] = {{"skew_norm", jnum(s.residuals.skew_norm)},
                      {"min_eig_P", jnum(s.residuals.min_eig_p)},
                      {"max_eig_He", jnum(s.residuals.max_eig_he)}};
  }
  if (run.stability) {
    j["closed_loop_eigs"] = eig_list(run.stability->loop_eigs);
    j["max_re_closed_loop"] = jnum(run.stability->max_re_loop);
  }
  if (run.oracle) {
    const auto& o = *run.oracle;
    json oj;
    oj["A_f"] = matrix_rows(o.dynamics.a_f);
    oj["B_f"] = matrix_rows(o.dynamics.b_f);
    oj["reachable"] = o.dynamics.reachable;
    oj["filter_identity_residual"] = {{"max", jnum(o.filter_identity.max_residual)},
                             {"threshold", jnum(o.filter_identity.threshold)},
                             {"passed", o.filter_identity.passed}};
    oj["annihilation"] = jnum(o.annihilation);
    oj["af_bf_rel_error"] = o.af_bf_rel_error ? jnum(*o.af_bf_rel_error) : json(nullptr);
    oj["decomposition_residual"] = jnum(o.decomposition.max_residual);
    oj["spectrum_gap"] = o.spectrum_gap ? jnum(*o.spectrum_gap) : json(nullptr);
    if (run.stability && run.stability->has_oracle) {
      oj["filtered_eigs"] = eig_list(run.stability->filtered_eigs);
      oj["max_re_filtered"] = jnum(run.stability->max_re_filtered);
    }
    j["oracle"] = oj;
  }
  j["config_echo"] = scenario_echo(run.scenario);
  return j;
}

json verify_json(const VerifyResult& ver) {
  json j;
  j["exit_code"] = ver.exit_code;
  j["all_passed"] = ver.exit_code == kExitOk;
  j["run_status"] = ver.run.status;
  j["run_message"] = ver.run.message;
  j["checks"] = json::array();
  for (const auto& c : ver.checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"passed", c.passed}, {"value", jnum(c.value)}, {"threshold", jnum(c.threshold)}});
  }
  j["config_echo"] = scenario_echo(ver.run.scenario);
  return j;
}

std::string summary_text(const RunResult& run) {
  std::ostringstream out;
  out.precision(6);
  const Scenario& sc = run.scenario;
  out << "scenario      " << sc.name << "\n";
  out << "plant         n=" << sc.n << " m=" << sc.m << " p=" << sc.p << "\n";
  out << "status        " << run.status << " (exit " << run.exit_code << ")\n";
  out << "message       " << run.message << "\n";
  out << "sampling      Ts=" << sc.ts << " N=" << sc.resolved_samples()
      << (run.pathology_free ? "" : "  WARNING: pathological sampling time") << "\n";
  if (!run.resonance_free) out << "warning       plant spectrum resonates with the filter (PE guarantee void)\n";
  if (run.has_data) {
    out << "excitation    certified order " << run.plan.certified_order << " after " << run.plan.attempts
        << " draw(s)\n";
    out << "annihilator   " << to_string(run.annihilator.route) << ", Nbar=" << run.annihilator.nbar() << "\n";
    out << "rank gate     " << (run.gate.passed ? "pass" : "FAIL") << ": " << run.gate.diagnostic() << "\n";
  }
  if (run.synthesis) {
    const auto& s = *run.synthesis;
    out << "lmi           " << to_string(s.status) << ", margin " << s.margin << " (strict tol " << s.strict_tol
        << "), skew " << s.residuals.skew_norm << ", " << s.newton_steps << " Newton steps\n";
    if (s.k_f.size()) {
      out << "K_f          ";
      for (Eigen::Index r = 0; r < s.k_f.rows(); ++r) {
        for (Eigen::Index c = 0; c < s.k_f.cols(); ++c) out << ' ' << s.k_f(r, c);
        if (r + 1 < s.k_f.rows()) out << " ;";
      }
      out << "\n";
    }
  }
  if (run.stability) {
    out << "closed loop   max Re " << run.stability->max_re_loop << "\n";
    if (run.stability->has_oracle) out << "filtered loop max Re " << run.stability->max_re_filtered << "\n";
  }
  if (run.oracle) {
    const auto& o = *run.oracle;
    out << "oracle        filter identity " << o.filter_identity.max_residual << " (<= " << o.filter_identity.threshold << "), annihilation "
        << o.annihilation << ", decomposition " << o.decomposition.max_residual;
    if (o.af_bf_rel_error) out << ", data identity " << *o.af_bf_rel_error;
    if (o.spectrum_gap) out << ", spectrum gap " << *o.spectrum_gap;
    out << "\n";
  }
  return out.str();
}

std::string sweep_summary_text(const SweepResult& sweep) {
  std::ostringstream out;
  out.precision(6);
  out << "axis            " << sweep.axis << "\n";
  out << "cells           " << sweep.rows.size() << "\n";
  out << "rank gate pass  " << sweep.gate_pass_rate() << "\n";
  out << "feasible        " << sweep.feasible_rate() << "\n";
  for (const auto& r : sweep.rows) {
    if (!r.gate_passed && r.exit_code == kExitRankGate) {
      out << "  " << sweep.axis << "=" << r.value << ": " << r.message << "\n";
    }
    if (!r.pathology_free) out << "  " << sweep.axis << "=" << r.value << ": pathological sampling time\n";
  }
  return out.str();
}

void write_run_artifacts(const RunResult& run, const std::string& dir) {
  const auto root = prepare_dir(dir);
  if (run.has_data) {
    write_text(root / "trajectory.csv", trajectory_csv(run.record));
    write_text(root / "annihilator.csv", matrix_csv(run.annihilator.w));
    write_text(root / "annihilator.json", annihilator_sidecar(run.annihilator).dump() + "\n");
    write_text(root / "excitation.csv", excitation_csv(run.plan));
  }
  json doc = synthesis_json(run);
  stamp_meta(doc, dir);
  write_text(root / "synthesis.json", doc.dump(2) + "\n");
  write_text(root / "summary.txt", summary_text(run));
}

void write_verify_artifacts(const VerifyResult& ver, const std::string& dir) {
  const auto root = prepare_dir(dir);
  json doc = verify_json(ver);
  stamp_meta(doc, dir);
  write_text(root / "verify.json", doc.dump(2) + "\n");
}

void write_sweep_artifacts(const SweepResult& sweep, const Scenario& sc, const std::string& dir) {
  const auto root = prepare_dir(dir);
  std::ostringstream csv;
  csv << sweep.axis << ",exit_code,status,gate_passed,rank,target,condition,margin,max_re_loop,pathology_free\n";
  for (const auto& r : sweep.rows) {
    csv << num(r.value) << ',' << r.exit_code << ',' << r.status << ',' << (r.gate_passed ? 1 : 0) << ',' << r.rank
        << ',' << r.target << ',' << num(r.condition) << ',' << num(r.margin) << ',' << num(r.max_re_loop) << ','
        << (r.pathology_free ? 1 : 0) << '\n';
  }
  write_text(root / "sweep.csv", csv.str());
  write_text(root / "summary.txt", "scenario        " + sc.name + "\n" + sweep_summary_text(sweep));
}

}  // namespace iostab
