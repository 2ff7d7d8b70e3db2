#include "iostab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iostab/error.hpp"

namespace iostab {

DataMatrices assemble_data_matrices(const ExperimentRecord& rec, const std::vector<int>& indices) {
  if (indices.empty()) throw Error(ErrorKind::kInput, "assemble_data_matrices: no sample indices");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= rec.samples()) {
      throw Error(ErrorKind::kDimension, "assemble_data_matrices: index " + std::to_string(indices[i]) +
                                             " outside the record (" + std::to_string(rec.samples()) + " samples)");
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw Error(ErrorKind::kInput, "assemble_data_matrices: indices must be strictly increasing");
    }
  }
  if (!(rec.t[static_cast<std::size_t>(indices.front())] > 0.0)) {
    throw Error(ErrorKind::kInput, "assemble_data_matrices: first sampling time must be positive");
  }
  const auto cols = static_cast<Eigen::Index>(indices.size());
  DataMatrices dm;
  dm.delta.resize(rec.delta.rows(), cols);
  dm.phi.resize(rec.phi.rows(), cols);
  dm.upsilon.resize(rec.upsilon.rows(), cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const int k = indices[static_cast<std::size_t>(j)];
    dm.delta.col(j) = rec.delta.col(k);
    dm.phi.col(j) = rec.phi.col(k);
    dm.upsilon.col(j) = rec.upsilon.col(k);
    dm.times.push_back(rec.t[static_cast<std::size_t>(k)]);
  }
  return dm;
}

DataMatrices assemble_data_matrices(const ExperimentRecord& rec) {
  std::vector<int> idx;
  for (int k = 1; k < rec.samples(); ++k) idx.push_back(k);
  return assemble_data_matrices(rec, idx);
}

FilteredData filter_data(const DataMatrices& dm, const Annihilator& w) {
  FilteredData fd;
  fd.delta = apply_annihilator(dm.delta, w);
  fd.phi = apply_annihilator(dm.phi, w);
  fd.upsilon = apply_annihilator(dm.upsilon, w);
  fd.route = w.route;
  if (!fd.delta.allFinite() || !fd.phi.allFinite() || !fd.upsilon.allFinite()) {
    throw Error(ErrorKind::kInput, "filter_data: non-finite filtered data");
  }
  return fd;
}

double RankGate::condition() const {
  if (singular_values.empty() || target < 1) return std::numeric_limits<double>::infinity();
  if (static_cast<int>(singular_values.size()) < target) return std::numeric_limits<double>::infinity();
  const double low = singular_values[static_cast<std::size_t>(target - 1)];
  return low > 0.0 ? singular_values.front() / low : std::numeric_limits<double>::infinity();
}

std::string RankGate::diagnostic() const {
  std::ostringstream out;
  out.precision(6);
  out << "rank " << rank << " of " << target << ", threshold " << threshold << ", sigma_max "
      << (singular_values.empty() ? 0.0 : singular_values.front()) << ", sigma_min "
      << (singular_values.empty() ? 0.0 : singular_values.back()) << ", condition " << condition();
  return out.str();
}

RankGate rank_gate(const FilteredData& fd, int n, int m, int p, const NumericPolicy& policy) {
  RankGate gate;
  gate.target = (m + p) * n + m;
  if (fd.phi.rows() != (m + p) * n || fd.upsilon.rows() != m) {
    throw Error(ErrorKind::kDimension, "rank_gate: filtered data does not match (n, m, p)");
  }
  Mat stacked(fd.phi.rows() + fd.upsilon.rows(), fd.phi.cols());
  stacked << fd.phi, fd.upsilon;
  if (stacked.size() == 0) return gate;
  const Vec sv = stacked.jacobiSvd().singularValues();
  gate.singular_values.assign(sv.data(), sv.data() + sv.size());
  gate.threshold = policy.rank_tol > 0.0 ? policy.rank_tol : auto_rank_threshold(stacked);
  gate.rank = numerical_rank(stacked, policy.rank_tol);
  gate.passed = gate.rank == gate.target;
  return gate;
}

std::pair<Mat, Mat> estimate_af_bf(const FilteredData& fd, const RankGate& gate, const NumericPolicy& policy) {
  if (!gate.passed) throw Error(ErrorKind::kConditioning, "estimate_af_bf: rank gate not passed (" + gate.diagnostic() + ")");
  Mat stacked(fd.phi.rows() + fd.upsilon.rows(), fd.phi.cols());
  stacked << fd.phi, fd.upsilon;
  const Mat ab = fd.delta * pinv_svd(stacked, policy.pinv_tol);
  return {ab.leftCols(fd.phi.rows()), ab.rightCols(fd.upsilon.rows())};
}

double LmiResiduals::margin() const { return std::min(min_eig_p, -max_eig_he); }

LmiResiduals check_lmi(const Mat& delta_bar, const Mat& phi_bar, const Mat& z) {
  if (z.rows() != phi_bar.rows() || z.cols() != phi_bar.cols() || delta_bar.rows() != phi_bar.rows() ||
      delta_bar.cols() != phi_bar.cols()) {
    throw Error(ErrorKind::kDimension, "check_lmi: Z, Delta_bar and Phi_bar must share their shape");
  }
  const Mat p = z * phi_bar.transpose();
  const Mat lyap = delta_bar * z.transpose();
  LmiResiduals res;
  res.skew_norm = (p - p.transpose()).norm();
  const Mat sym_p = p + p.transpose();
  const Mat sym_l = lyap + lyap.transpose();
  res.min_eig_p = Eigen::SelfAdjointEigenSolver<Mat>(sym_p, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  res.max_eig_he = Eigen::SelfAdjointEigenSolver<Mat>(sym_l, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  return res;
}

const char* to_string(SynthesisStatus status) {
  return status == SynthesisStatus::kFeasible ? "feasible" : "infeasible";
}

Mat compute_gain(const FilteredData& fd, const Mat& z) {
  if (z.rows() != fd.phi.rows() || z.cols() != fd.phi.cols()) {
    throw Error(ErrorKind::kDimension, "compute_gain: Z must be shaped like Phi_bar");
  }
  const Mat p = z * fd.phi.transpose();
  const Mat sym = 0.5 * (p + p.transpose());
  const Eigen::LLT<Mat> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kConditioning, "compute_gain: Z Phi_bar^T is not numerically positive definite");
  }
  // K_f^T = P^-1 (Upsilon_bar Z^T)^T with P symmetric.
  return llt.solve(z * fd.upsilon.transpose()).transpose();
}

SynthesisResult solve_stabilization_lmi(const FilteredData& fd, const NumericPolicy& policy, bool parallel) {
  if (fd.delta.rows() != fd.phi.rows() || fd.delta.cols() != fd.phi.cols()) {
    throw Error(ErrorKind::kDimension, "solve_stabilization_lmi: Delta_bar and Phi_bar differ in shape");
  }
  MarginLmiOptions opts;
  opts.gap_rel = policy.lmi_gap_rel;
  opts.max_newton = policy.lmi_max_newton;
  opts.parallel = parallel;
  const MarginLmiSolution sol = solve_margin_lmi(fd.delta, fd.phi, opts);

  SynthesisResult res;
  res.z = sol.z;
  res.solver_margin = sol.t;
  res.radius = sol.radius;
  res.newton_steps = sol.newton_steps;
  res.outer_steps = sol.outer_steps;
  res.residuals = check_lmi(fd.delta, fd.phi, sol.z);
  res.margin = std::min(sol.t, res.residuals.margin());
  const double norm_d = fd.delta.size() ? fd.delta.jacobiSvd().singularValues()(0) : 0.0;
  const double norm_p = fd.phi.size() ? fd.phi.jacobiSvd().singularValues()(0) : 0.0;
  res.strict_tol = policy.lmi_strict_rel * std::max(norm_d, norm_p);
  if (res.margin > res.strict_tol) {
    res.status = SynthesisStatus::kFeasible;
    res.k_f = compute_gain(fd, res.z);
  }
  return res;
}

StabilityReport verify_synthesis(const StateSpace& plant, const FilterSpec& spec, const Mat& k_f,
                                 const std::optional<std::pair<Mat, Mat>>& af_bf, const NumericPolicy& policy) {
  StabilityReport rep;
  const auto ctrl = build_controller(spec, k_f);
  const Spectrum loop = spectrum(closed_loop_matrix(plant, ctrl));
  rep.loop_eigs = loop.values;
  rep.max_re_loop = loop.max_real();
  rep.passed = rep.max_re_loop < -policy.stability_tol;
  if (af_bf) {
    rep.has_oracle = true;
    const Spectrum filt = spectrum(af_bf->first + af_bf->second * k_f);
    rep.filtered_eigs = filt.values;
    rep.max_re_filtered = filt.max_real();
    rep.passed = rep.passed && rep.max_re_filtered < -policy.stability_tol;
  }
  return rep;
}

Mat converse_candidate(const FilteredData& fd, const Mat& a_f, const Mat& b_f, const Mat& k_f,
                       const NumericPolicy& policy) {
  const Mat closed = a_f + b_f * k_f;
  const Eigen::Index q = closed.rows();
  const Mat p = solve_sylvester(closed, closed.transpose(), -Mat::Identity(q, q));
  Mat stacked(fd.phi.rows() + fd.upsilon.rows(), fd.phi.cols());
  stacked << fd.phi, fd.upsilon;
  Mat rhs(q + k_f.rows(), q);
  rhs << p, k_f * p;
  return (pinv_svd(stacked, policy.pinv_tol) * rhs).transpose();
}

}  // namespace iostab
