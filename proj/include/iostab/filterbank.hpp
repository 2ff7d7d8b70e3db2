#pragma once

#include <vector>

#include "iostab/matkit.hpp"
#include "iostab/plant.hpp"
#include "iostab/policy.hpp"

namespace iostab {

/// Filter polynomial q_r(s) = s^n + c_1 s^(n-1) + ... + c_n and the scalar beta.
/// Construction rejects a non-Hurwitz q_r and a beta with q_r(-beta) = 0.
class FilterSpec {
 public:
  FilterSpec(std::vector<double> c, double beta, int m, int p, const NumericPolicy& policy = {});

  int n() const { return static_cast<int>(c_.size()); }
  int m() const { return m_; }
  int p() const { return p_; }
  /// (m + p) n, the dimension of chi = col(zeta, mu).
  int chi_dim() const { return (m_ + p_) * n(); }
  const std::vector<double>& c() const { return c_; }
  double beta() const { return beta_; }
  PolyCoeffs q_r() const { return PolyCoeffs::monic(c_); }

 private:
  std::vector<double> c_;
  double beta_;
  int m_;
  int p_;
};

struct CompanionMatrices {
  Mat a_r;
  Mat b_r;
  Mat a_rm;  // A_r (x) I_m
  Mat b_rm;  // B_r (x) I_m
  Mat a_rp;  // A_r (x) I_p
  Mat b_rp;  // B_r (x) I_p
};

CompanionMatrices build_companion(const FilterSpec& spec);

/// Block offsets of the augmented state col(x, zeta, mu, phi, upsilon).
struct AugmentedLayout {
  int h = 0;  // plant states
  int m = 0;
  int p = 0;
  int n = 0;
  int x() const { return 0; }
  int zeta() const { return h; }
  int mu() const { return h + m * n; }
  int phi() const { return h + (m + p) * n; }
  int upsilon() const { return h + 2 * (m + p) * n; }
  int states() const { return h + 2 * (m + p) * n + m; }
  int chi_dim() const { return (m + p) * n; }
};

/// Plant and filters as one LTI system driven by u. The output map emits, in
/// order, (y, zeta, mu, phi, upsilon, delta) with delta = chi - beta * phi.
struct ExperimentSystem {
  StateSpace sys;
  AugmentedLayout layout;
  double beta = 0.0;
};

ExperimentSystem assemble_experiment_system(const StateSpace& plant, const FilterSpec& spec);

/// Sampled trajectories on t_k = k T_S, k = 0..N. u at sample k is the value
/// held on [t_k, t_{k+1}); the last sample repeats the final held value.
struct ExperimentRecord {
  int m = 0;
  int p = 0;
  int n = 0;
  double ts = 0.0;
  std::vector<double> t;
  Mat u;        // m x (N+1)
  Mat y;        // p x (N+1)
  Mat zeta;     // mn x (N+1)
  Mat mu;       // pn x (N+1)
  Mat phi;      // (m+p)n x (N+1)
  Mat upsilon;  // m x (N+1)
  Mat delta;    // (m+p)n x (N+1)
  Vec x0;

  int samples() const { return static_cast<int>(t.size()); }
  Mat chi() const;
};

/// Exact zero-order-hold discretization of `aug` with step ts (one block
/// exponential), then x_{k+1} = A_d x_k + B_d d_k.
ExperimentRecord simulate_zoh(const ExperimentSystem& aug, const Vec& x0_aug, const std::vector<Vec>& inputs,
                              double ts);

/// Convenience wrapper: plant state x0, all filter states zero.
ExperimentRecord simulate_experiment(const StateSpace& plant, const FilterSpec& spec, const Vec& x0,
                                     const std::vector<Vec>& inputs, double ts);

/// (A_d, B_d) of the exact ZOH discretization.
std::pair<Mat, Mat> discretize_zoh(const Mat& a, const Mat& b, double ts);

/// Dynamic output feedback: state chi = col(zeta, mu), input y, output
/// u = K_f chi. The zeta filter is driven by the controller's own output.
struct ControllerRealization {
  Mat a;  // (m+p)n x (m+p)n
  Mat b;  // (m+p)n x p
  Mat c;  // m x (m+p)n
  Mat k_f;
};

ControllerRealization build_controller(const FilterSpec& spec, const Mat& k_f);

/// Autonomous matrix of the plant/controller loop, state col(x, zeta, mu).
Mat closed_loop_matrix(const StateSpace& plant, const ControllerRealization& ctrl);

}  // namespace iostab
