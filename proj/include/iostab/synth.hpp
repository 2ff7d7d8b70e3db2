#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iostab/excite.hpp"
#include "iostab/filterbank.hpp"
#include "iostab/lmi.hpp"
#include "iostab/matkit.hpp"
#include "iostab/plant.hpp"
#include "iostab/policy.hpp"

namespace iostab {

struct DataMatrices {
  Mat delta;    // (m+p)n x N
  Mat phi;      // (m+p)n x N
  Mat upsilon;  // m x N
  std::vector<double> times;
};

/// Columns are the recorded samples at the given indices (strictly
/// increasing, t at the first index > 0).
DataMatrices assemble_data_matrices(const ExperimentRecord& rec, const std::vector<int>& indices);

/// All samples 1..N of the record.
DataMatrices assemble_data_matrices(const ExperimentRecord& rec);

struct FilteredData {
  Mat delta;
  Mat phi;
  Mat upsilon;
  AnnihilatorRoute route = AnnihilatorRoute::kUniformFir;

  int nbar() const { return static_cast<int>(phi.cols()); }
  int chi_dim() const { return static_cast<int>(phi.rows()); }
  int m() const { return static_cast<int>(upsilon.rows()); }
};

FilteredData filter_data(const DataMatrices& dm, const Annihilator& w);

struct RankGate {
  bool passed = false;
  int rank = 0;
  int target = 0;
  double threshold = 0.0;
  std::vector<double> singular_values;

  /// sigma_max / sigma_target (infinity if the target singular value is zero).
  double condition() const;
  std::string diagnostic() const;
};

/// rank(col(Phi_bar, Upsilon_bar)) against (m+p)n + m.
RankGate rank_gate(const FilteredData& fd, int n, int m, int p, const NumericPolicy& policy = {});

/// Least-squares identity [A_f B_f] = Delta_bar col(Phi_bar, Upsilon_bar)^+.
/// Validation only; refuses data that did not pass the gate.
std::pair<Mat, Mat> estimate_af_bf(const FilteredData& fd, const RankGate& gate, const NumericPolicy& policy = {});

struct LmiResiduals {
  double skew_norm = 0.0;   // ||Sk(Z Phi_bar^T)||_F
  double min_eig_p = 0.0;   // min eig He(Z Phi_bar^T)
  double max_eig_he = 0.0;  // max eig He(Delta_bar Z^T)

  /// min(min_eig_p, -max_eig_he).
  double margin() const;
};

/// Re-evaluates the three matrix conditions for a given Z from scratch.
LmiResiduals check_lmi(const Mat& delta_bar, const Mat& phi_bar, const Mat& z);

enum class SynthesisStatus { kFeasible, kInfeasible };

const char* to_string(SynthesisStatus status);

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::kInfeasible;
  Mat z;
  Mat k_f;  // empty unless feasible
  // Declared margin: min of the solver's t and the re-measured margin.
  double margin = 0.0;
  double solver_margin = 0.0;
  double strict_tol = 0.0;
  double radius = 0.0;
  LmiResiduals residuals;
  int newton_steps = 0;
  int outer_steps = 0;
};

SynthesisResult solve_stabilization_lmi(const FilteredData& fd, const NumericPolicy& policy = {},
                                        bool parallel = true);

/// K_f = Upsilon_bar Z^T (Z Phi_bar^T)^-1 through a Cholesky solve.
Mat compute_gain(const FilteredData& fd, const Mat& z);

struct StabilityReport {
  bool has_oracle = false;
  double max_re_filtered = 0.0;  // max Re eig(A_f + B_f K_f), oracle mode
  double max_re_loop = 0.0;      // max Re eig of the plant/controller loop
  std::vector<Complex> filtered_eigs;
  std::vector<Complex> loop_eigs;
  bool passed = false;
};

/// Both checks must be below -stability_tol; the filtered check is skipped
/// when no (A_f, B_f) is supplied.
StabilityReport verify_synthesis(const StateSpace& plant, const FilterSpec& spec, const Mat& k_f,
                                 const std::optional<std::pair<Mat, Mat>>& af_bf, const NumericPolicy& policy = {});

/// Candidate Z^T = col(Phi_bar, Upsilon_bar)^+ col(P, K_f P) where P solves
/// (A_f + B_f K_f) P + P (A_f + B_f K_f)^T = -I. Heuristic: it satisfies the
/// LMI whenever the data identity is exact and the gate passed.
Mat converse_candidate(const FilteredData& fd, const Mat& a_f, const Mat& b_f, const Mat& k_f,
                       const NumericPolicy& policy = {});

}  // namespace iostab
