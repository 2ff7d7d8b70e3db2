#pragma once

// Model-based ground truth. Everything here needs the plant coefficients and
// is used only for verification, never on the synthesis path.

#include <span>
#include <vector>

#include "iostab/filterbank.hpp"
#include "iostab/matkit.hpp"
#include "iostab/plant.hpp"
#include "iostab/policy.hpp"

namespace iostab {

struct FilteredDynamicsOracle {
  Mat a_f;  // (m+p)n x (m+p)n
  Mat b_f;  // (m+p)n x m
  Mat g_f;  // (m+p)n x pn
  int reach_rank = 0;
  bool reachable = false;
};

/// Filter-state dynamics chi' = A_f chi + B_f u + G_f e^{A_r,p^T t} x0 built
/// directly from the coefficients. Refuses models violating the plant
/// assumptions.
FilteredDynamicsOracle build_filtered_dynamics(const DiffOpModel& model, const FilterSpec& spec,
                                               const NumericPolicy& policy = {});

/// Gamma solving Gamma A_r,p^T + beta Gamma = G_f.
Mat disturbance_gain(const FilterSpec& spec, const FilteredDynamicsOracle& oracle);

/// Columns eps(t_k) = Gamma (e^{A_r,p^T t_k} - e^{-beta t_k} I) x0, with eps(0) = 0.
Mat epsilon_trajectory(const FilterSpec& spec, const FilteredDynamicsOracle& oracle, const Vec& x0,
                       std::span<const double> times);

struct FilterIdentityResidual {
  double max_residual = 0.0;  // max_k ||delta - A_f phi - B_f upsilon - eps||_inf
  double max_delta = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

FilterIdentityResidual check_filter_identity_residual(const ExperimentRecord& rec, const FilteredDynamicsOracle& oracle,
                                     const Mat& eps_cols, const NumericPolicy& policy = {});

struct ThetaEstimate {
  std::vector<Vec> trajectory;  // theta_hat at every sample
  Vec final_estimate;
  std::vector<double> prediction_error;  // psi - theta_hat^T regressor at every sample
  std::vector<double> regressor_norm;
};

/// Normalized gradient law for theta = (b_1..b_n, a_1..a_n), SISO only. The
/// regressor pairs b_i with zeta_{n-i+1} and a_i with -mu_{n-i+1}, the target
/// is psi = y - sum c_i mu_{n-i+1}. Explicit Euler with `substeps` per sample
/// interval, signals interpolated linearly between samples.
ThetaEstimate gradient_estimator(const ExperimentRecord& rec, const FilterSpec& spec, const Vec& theta0,
                                 int substeps = 20);

/// Stacked true parameter vector (b_1..b_n, a_1..a_n) of a SISO model.
Vec true_theta(const DiffOpModel& model);

struct DecompositionReport {
  double top_left = 0.0;     // ||(P^-1 A_i P)_11 - A_f||
  double bottom_left = 0.0;  // ||(P^-1 A_i P)_21||
  double bottom_right = 0.0; // ||(P^-1 A_i P)_22 - A_r,p^T||
  double top_right = 0.0;    // ||(P^-1 A_i P)_12 - G_f||
  double input = 0.0;        // ||P^-1 B_i - col(B_f, 0)||
  double c_mho2 = 0.0;       // ||C Mho_2 - [c_n I - A_n ... c_1 I - A_1]||
  double c_mho1 = 0.0;       // ||C Mho_1 - [B_n ... B_1]||
  double max_residual = 0.0;
  bool passed = false;
};

/// Interconnection (zeta, mu, x) and its reachability-decomposition transform
/// built from Mho_1 = F - q_r(A) O^-1 M, Mho_2 = q_r(A) O^-1.
DecompositionReport verify_interconnection_decomposition(const DiffOpModel& model, const FilterSpec& spec,
                                                         const NumericPolicy& policy = {});

/// Distance between the loop spectrum and eig(A_f + B_f K_f) U eig(A_r,p^T).
double loop_spectrum_gap(const StateSpace& plant, const FilterSpec& spec, const FilteredDynamicsOracle& oracle,
                         const Mat& k_f);

}  // namespace iostab
