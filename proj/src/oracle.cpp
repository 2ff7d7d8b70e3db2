#include "iostab/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "iostab/error.hpp"

namespace iostab {

namespace {

void require_match(const DiffOpModel& model, const FilterSpec& spec, const char* where) {
  if (model.n() != spec.n() || model.m() != spec.m() || model.p() != spec.p()) {
    throw Error(ErrorKind::kDimension, std::string(where) + ": plant and filter orders differ");
  }
}

}  // namespace

FilteredDynamicsOracle build_filtered_dynamics(const DiffOpModel& model, const FilterSpec& spec,
                                               const NumericPolicy& policy) {
  require_match(model, spec, "build_filtered_dynamics");
  const std::string violation = plant_assumption_violation(model, policy);
  if (!violation.empty()) throw Error(ErrorKind::kAssumption, "build_filtered_dynamics: " + violation);
  const int n = spec.n();
  const int m = spec.m();
  const int p = spec.p();
  const int mn = m * n;
  const int pn = p * n;
  const auto cm = build_companion(spec);

  FilteredDynamicsOracle out;
  out.a_f = Mat::Zero(mn + pn, mn + pn);
  out.a_f.topLeftCorner(mn, mn) = cm.a_rm;
  // Last block row: [B_n ... B_1] on zeta and [-A_n ... -A_1] on mu.
  for (int j = 0; j < n; ++j) {
    out.a_f.block(mn + (n - 1) * p, j * m, p, m) = model.b_coef()[static_cast<std::size_t>(n - 1 - j)];
    out.a_f.block(mn + (n - 1) * p, mn + j * p, p, p) = -model.a_coef()[static_cast<std::size_t>(n - 1 - j)];
  }
  for (int i = 0; i + 1 < n; ++i) out.a_f.block(mn + i * p, mn + (i + 1) * p, p, p) = Mat::Identity(p, p);
  out.b_f = Mat::Zero(mn + pn, m);
  out.b_f.topRows(mn) = cm.b_rm;
  Mat c_m = Mat::Zero(p, pn);
  c_m.rightCols(p) = Mat::Identity(p, p);
  out.g_f = Mat::Zero(mn + pn, pn);
  out.g_f.bottomRows(pn) = cm.b_rp * c_m;

  out.reach_rank = numerical_rank(reachability_matrix(out.a_f, out.b_f), policy.rank_tol);
  out.reachable = out.reach_rank == mn + pn;
  return out;
}

Mat disturbance_gain(const FilterSpec& spec, const FilteredDynamicsOracle& oracle) {
  const auto cm = build_companion(spec);
  const Eigen::Index q = oracle.g_f.rows();
  try {
    return solve_sylvester(spec.beta() * Mat::Identity(q, q), cm.a_rp.transpose(), oracle.g_f);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kNoUniqueSolution) {
      throw Error(ErrorKind::kAssumption, "disturbance_gain: -beta is an eigenvalue of A_r");
    }
    throw;
  }
}

Mat epsilon_trajectory(const FilterSpec& spec, const FilteredDynamicsOracle& oracle, const Vec& x0,
                       std::span<const double> times) {
  const auto cm = build_companion(spec);
  if (x0.size() != cm.a_rp.rows()) throw Error(ErrorKind::kDimension, "epsilon_trajectory: x0 must have length pn");
  const Mat gamma = disturbance_gain(spec, oracle);
  const Mat a_t = cm.a_rp.transpose();
  const Eigen::Index h = x0.size();
  Mat eps = Mat::Zero(gamma.rows(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (t == 0.0) continue;
    const Mat e = mat_exp(a_t * t) - std::exp(-spec.beta() * t) * Mat::Identity(h, h);
    eps.col(static_cast<Eigen::Index>(k)) = gamma * (e * x0);
  }
  return eps;
}

FilterIdentityResidual check_filter_identity_residual(const ExperimentRecord& rec, const FilteredDynamicsOracle& oracle,
                                     const Mat& eps_cols, const NumericPolicy& policy) {
  if (eps_cols.cols() != rec.samples() || eps_cols.rows() != rec.delta.rows() ||
      oracle.a_f.rows() != rec.delta.rows()) {
    throw Error(ErrorKind::kDimension, "check_filter_identity_residual: record, oracle and eps columns disagree");
  }
  const Mat resid = rec.delta - oracle.a_f * rec.phi - oracle.b_f * rec.upsilon - eps_cols;
  FilterIdentityResidual out;
  for (Eigen::Index k = 0; k < resid.cols(); ++k) {
    out.max_residual = std::max(out.max_residual, resid.col(k).lpNorm<Eigen::Infinity>());
    out.max_delta = std::max(out.max_delta, rec.delta.col(k).lpNorm<Eigen::Infinity>());
  }
  out.threshold = policy.filter_identity_rel * (1.0 + out.max_delta);
  out.passed = out.max_residual <= out.threshold;
  return out;
}

Vec true_theta(const DiffOpModel& model) {
  if (!model.is_siso()) throw Error(ErrorKind::kInput, "true_theta: SISO models only");
  const int n = model.n();
  Vec theta(2 * n);
  for (int i = 0; i < n; ++i) {
    theta(i) = model.b_coef()[static_cast<std::size_t>(i)](0, 0);
    theta(n + i) = model.a_coef()[static_cast<std::size_t>(i)](0, 0);
  }
  return theta;
}

ThetaEstimate gradient_estimator(const ExperimentRecord& rec, const FilterSpec& spec, const Vec& theta0,
                                 int substeps) {
  if (rec.m != 1 || rec.p != 1) throw Error(ErrorKind::kInput, "gradient_estimator: SISO records only");
  const int n = rec.n;
  if (theta0.size() != 2 * n) throw Error(ErrorKind::kDimension, "gradient_estimator: theta0 must have length 2n");
  if (substeps < 1) throw Error(ErrorKind::kInput, "gradient_estimator: substeps must be >= 1");
  const auto& c = spec.c();
  const int samples = rec.samples();

  Mat reg(2 * n, samples);
  Vec target(samples);
  for (int k = 0; k < samples; ++k) {
    double psi = rec.y(0, k);
    for (int i = 1; i <= n; ++i) {
      reg(i - 1, k) = rec.zeta(n - i, k);
      reg(n + i - 1, k) = -rec.mu(n - i, k);
      psi -= c[static_cast<std::size_t>(i - 1)] * rec.mu(n - i, k);
    }
    target(k) = psi;
  }

  ThetaEstimate out;
  Vec theta = theta0;
  for (int k = 0; k < samples; ++k) {
    out.trajectory.push_back(theta);
    out.prediction_error.push_back(target(k) - theta.dot(reg.col(k)));
    out.regressor_norm.push_back(reg.col(k).norm());
    if (k + 1 == samples) break;
    const double h = (rec.t[static_cast<std::size_t>(k + 1)] - rec.t[static_cast<std::size_t>(k)]) / substeps;
    for (int s = 0; s < substeps; ++s) {
      const double w = static_cast<double>(s) / substeps;
      const Vec chi = (1.0 - w) * reg.col(k) + w * reg.col(k + 1);
      const double psi = (1.0 - w) * target(k) + w * target(k + 1);
      theta += h * (psi - theta.dot(chi)) / (1.0 + chi.squaredNorm()) * chi;
    }
  }
  out.final_estimate = theta;
  return out;
}

DecompositionReport verify_interconnection_decomposition(const DiffOpModel& model, const FilterSpec& spec,
                                                         const NumericPolicy& policy) {
  const auto oracle = build_filtered_dynamics(model, spec, policy);
  const StateSpace ss = realize_observability_canonical(model);
  const auto cm = build_companion(spec);
  const int n = spec.n();
  const int m = spec.m();
  const int p = spec.p();
  const int mn = m * n;
  const int pn = p * n;
  const int dim = mn + 2 * pn;

  Mat a_i = Mat::Zero(dim, dim);
  a_i.topLeftCorner(mn, mn) = cm.a_rm;
  a_i.block(mn, mn, pn, pn) = cm.a_rp;
  a_i.block(mn, mn + pn, pn, pn) = cm.b_rp * ss.c;
  a_i.bottomRightCorner(pn, pn) = ss.a;
  Mat b_i = Mat::Zero(dim, m);
  b_i.topRows(mn) = cm.b_rm;
  b_i.bottomRows(pn) = ss.b;

  const Mat obs = observability_matrix(ss, n);
  const Mat markov = markov_toeplitz(ss, n);
  const Mat q_of_a = poly_eval_matrix(spec.q_r(), ss.a);
  const auto& c = spec.c();
  Mat f = Mat::Zero(pn, mn);
  for (int j = 0; j < n; ++j) {
    // sum_{i=0}^{n-1-j} c_i A^{n-1-j-i} B with c_0 = 1, by Horner.
    Mat acc = Mat::Zero(pn, pn);
    for (int i = 0; i <= n - 1 - j; ++i) {
      acc = acc * ss.a;
      acc += (i == 0 ? 1.0 : c[static_cast<std::size_t>(i - 1)]) * Mat::Identity(pn, pn);
    }
    f.middleCols(j * m, m) = acc * ss.b;
  }
  const Eigen::PartialPivLU<Mat> obs_lu(obs);
  const Mat mho2 = q_of_a * obs_lu.inverse();
  const Mat mho1 = f - mho2 * markov;

  Mat t = Mat::Identity(dim, dim);
  t.block(mn + pn, 0, pn, mn) = mho1;
  t.block(mn + pn, mn, pn, pn) = mho2;
  // P is unit lower block triangular, so P^-1 only flips the sign of the Mho blocks.
  Mat t_inv = Mat::Identity(dim, dim);
  t_inv.block(mn + pn, 0, pn, mn) = -mho1;
  t_inv.block(mn + pn, mn, pn, pn) = -mho2;

  const Mat a_t = t_inv * a_i * t;
  const Mat b_t = t_inv * b_i;
  const int q = mn + pn;

  DecompositionReport rep;
  rep.top_left = (a_t.topLeftCorner(q, q) - oracle.a_f).norm();
  rep.bottom_left = a_t.bottomLeftCorner(pn, q).norm();
  rep.bottom_right = (a_t.bottomRightCorner(pn, pn) - cm.a_rp.transpose()).norm();
  rep.top_right = (a_t.topRightCorner(q, pn) - oracle.g_f).norm();
  Mat b_expect = Mat::Zero(dim, m);
  b_expect.topRows(q) = oracle.b_f;
  rep.input = (b_t - b_expect).norm();

  Mat c_mho2_expect(p, pn);
  Mat c_mho1_expect(p, mn);
  for (int j = 0; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(n - 1 - j);
    c_mho2_expect.middleCols(j * p, p) = c[idx] * Mat::Identity(p, p) - model.a_coef()[idx];
    c_mho1_expect.middleCols(j * m, m) = model.b_coef()[idx];
  }
  rep.c_mho2 = (ss.c * mho2 - c_mho2_expect).norm();
  rep.c_mho1 = (ss.c * mho1 - c_mho1_expect).norm();
  rep.max_residual = std::max({rep.top_left, rep.bottom_left, rep.bottom_right, rep.top_right, rep.input,
                               rep.c_mho2, rep.c_mho1});
  rep.passed = rep.max_residual <= policy.decomposition_tol;
  return rep;
}

double loop_spectrum_gap(const StateSpace& plant, const FilterSpec& spec, const FilteredDynamicsOracle& oracle,
                         const Mat& k_f) {
  const Spectrum loop = spectrum(closed_loop_matrix(plant, build_controller(spec, k_f)));
  std::vector<Complex> expect = spectrum(oracle.a_f + oracle.b_f * k_f).values;
  for (const auto& z : spectrum(build_companion(spec).a_rp.transpose()).values) expect.push_back(z);
  return multiset_distance(loop.values, expect);
}

}  // namespace iostab
