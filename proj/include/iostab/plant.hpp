#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "iostab/matkit.hpp"
#include "iostab/policy.hpp"

namespace iostab {

/// y^(n) + A_1 y^(n-1) + ... + A_n y = B_1 u^(n-1) + ... + B_n u.
/// a_coef[i] is A_{i+1} (p x p), b_coef[i] is B_{i+1} (p x m).
class DiffOpModel {
 public:
  DiffOpModel(int n, int m, int p, std::vector<Mat> a_coef, std::vector<Mat> b_coef);

  /// SISO model from the tails a_1..a_n and b_1..b_n.
  static DiffOpModel siso(const std::vector<double>& a, const std::vector<double>& b);

  int n() const { return n_; }
  int m() const { return m_; }
  int p() const { return p_; }
  bool is_siso() const { return m_ == 1 && p_ == 1; }
  const std::vector<Mat>& a_coef() const { return a_coef_; }
  const std::vector<Mat>& b_coef() const { return b_coef_; }

  /// SISO only: s^n + a_1 s^(n-1) + ... + a_n.
  PolyCoeffs denominator() const;
  /// SISO only: b_1 s^(n-1) + ... + b_n.
  PolyCoeffs numerator() const;

 private:
  int n_;
  int m_;
  int p_;
  std::vector<Mat> a_coef_;
  std::vector<Mat> b_coef_;
};

struct StateSpace {
  Mat a;
  Mat b;
  Mat c;

  Eigen::Index states() const { return a.rows(); }
  Eigen::Index inputs() const { return b.cols(); }
  Eigen::Index outputs() const { return c.rows(); }
  /// Throws a dimension error unless A is square and B, C conform.
  void validate() const;
};

StateSpace realize_observability_canonical(const DiffOpModel& model);

struct CoprimeCheck {
  bool coprime = false;
  double resultant = 0.0;
  double scale = 0.0;
  std::string diagnostic;
};

/// Resultant of the two polynomials as the Sylvester-matrix determinant.
double resultant(const PolyCoeffs& a, const PolyCoeffs& b);

/// |res| is compared against resultant_rel_tol * ||a||^deg(b) * ||b||^deg(a).
CoprimeCheck check_coprime(const PolyCoeffs& a, const PolyCoeffs& b, const NumericPolicy& policy = {});

/// Standing SISO plant conditions: denominator (monic, degree n) and numerator
/// (degree <= n - 1) share no root.
CoprimeCheck check_coprime_siso(const PolyCoeffs& a, const PolyCoeffs& b, const NumericPolicy& policy = {});

/// -beta is not a root of q_r.
bool check_beta_admissible(const PolyCoeffs& q_r, double beta, const NumericPolicy& policy = {});

/// a(s)(s + beta) and q_r(s) share no root.
bool check_c_nonresonant(const PolyCoeffs& a, const PolyCoeffs& q_r, double beta,
                         const NumericPolicy& policy = {});

struct InitialConditionMap {
  Mat obs;     // O = col(C, CA, ..., CA^(n-1))
  Mat markov;  // block lower-triangular Toeplitz of C A^k B
  Vec y_derivs;
};

/// col(y, y', ..., y^(n-1))(0) = O x0 + M col(u, ..., u^(n-1))(0).
InitialConditionMap initial_condition_map(const StateSpace& ss, int n, const Vec& x0, const Vec& u_derivs);

/// Inverse map x0 = O^-1 (y_derivs - M u_derivs); throws kNotObservable if O is singular.
Vec recover_initial_state(const StateSpace& ss, int n, const Vec& y_derivs, const Vec& u_derivs,
                          const NumericPolicy& policy = {});

Mat observability_matrix(const StateSpace& ss, int depth);
Mat reachability_matrix(const Mat& a, const Mat& b);
Mat markov_toeplitz(const StateSpace& ss, int depth);

/// Reachable, observable with depth n, and h == p * n.
bool check_minimality_mimo(const StateSpace& ss, int n, const NumericPolicy& policy = {});

/// Assumption checks for a model: coprime numerator/denominator (SISO) or the
/// minimality class (MIMO). Returns an empty string when satisfied.
std::string plant_assumption_violation(const DiffOpModel& model, const NumericPolicy& policy = {});

struct RandomPlantOptions {
  int n = 1;
  int m = 1;
  int p = 1;
  double re_range = 2.0;
  double im_range = 1.0;
  // Rejection: every pole at least this far from each excluded point.
  double min_separation = 0.0;
  std::vector<Complex> excluded;
  bool require_unstable = false;
  int max_attempts = 1000;
};

/// SISO: poles and zeros drawn in [-re, re] x [-im, im]i, conjugate-closed,
/// non-coprime draws rejected. MIMO: uniform coefficient blocks, rejected
/// unless the realization is minimal.
DiffOpModel random_plant(std::mt19937_64& rng, const RandomPlantOptions& opts, const NumericPolicy& policy = {});

/// Monic polynomial with the given conjugate-closed roots (imaginary parts of
/// the product are discarded).
PolyCoeffs poly_from_roots(const std::vector<Complex>& roots);

}  // namespace iostab
