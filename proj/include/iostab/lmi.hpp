#pragma once

#include <vector>

#include "iostab/matkit.hpp"

namespace iostab {

/// Gradient and Hessian of -logdet(F) along the symmetric directions F_i:
/// grad_i = -tr(F^-1 F_i), hess_ij = tr(F^-1 F_i F^-1 F_j). Both kernels add
/// into `grad` and `hess` and return false (leaving them untouched) when F is
/// not positive definite.
bool logdet_derivatives_parallel(const Mat& f, const std::vector<Mat>& dirs, Vec& grad, Mat& hess);
bool logdet_derivatives_serial(const Mat& f, const std::vector<Mat>& dirs, Vec& grad, Mat& hess);

struct MarginLmiOptions {
  // Frobenius bound on Z; <= 0 selects sqrt(number of columns).
  double radius = 0.0;
  double gap_rel = 1e-9;
  int max_newton = 400;
  double tau_growth = 10.0;
  bool parallel = true;
};

struct MarginLmiSolution {
  Mat z;
  double t = 0.0;
  double radius = 0.0;
  double gap_bound = 0.0;
  int newton_steps = 0;
  int outer_steps = 0;
  int free_dim = 0;   // coordinates left after the skew equalities
  int compressed = 0; // column-space dimension used by the solver
};

/// Maximizes t subject to He(D Z^T) <= -t I, He(Z P^T) >= t I,
/// Sk(Z P^T) = 0 and ||Z||_F <= radius, with D = delta, P = phi (both q x N).
/// The equality is eliminated by an orthonormal nullspace parameterization;
/// the two inequality blocks and the norm ball are handled by a log-barrier
/// path-following method started from the strictly feasible (Z, t) = (0, -1).
MarginLmiSolution solve_margin_lmi(const Mat& delta, const Mat& phi, const MarginLmiOptions& opts = {});

/// Orthonormal basis (columns) of { vec(Y) : Sk(Y P^T) = 0 }, Y is q x P.cols().
Mat skew_free_basis(const Mat& phi);

/// Least-norm correction of Z onto Sk(Z P^T) = 0.
Mat project_skew_free(const Mat& z, const Mat& phi);

}  // namespace iostab
