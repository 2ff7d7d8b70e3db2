#pragma once

// Dense real-matrix kernels shared by every other module.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace iostab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Real polynomial, coefficients in descending degree: coeffs[0] s^d + ... + coeffs[d].
struct PolyCoeffs {
  std::vector<double> coeffs;

  /// s^n + tail[0] s^(n-1) + ... + tail[n-1].
  static PolyCoeffs monic(std::span<const double> tail);
  static PolyCoeffs monic(std::initializer_list<double> tail) {
    return monic(std::span<const double>(tail.begin(), tail.size()));
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_zero() const;
  /// Drops leading zero coefficients (keeps one zero for the zero polynomial).
  PolyCoeffs trimmed() const;
  Complex operator()(Complex s) const;
  double operator()(double s) const;
  /// The coefficients after the leading one.
  std::vector<double> tail() const { return {coeffs.begin() + 1, coeffs.end()}; }
  double norm() const;
};

PolyCoeffs poly_multiply(const PolyCoeffs& a, const PolyCoeffs& b);

/// Multiset of complex eigenvalues, sorted by (real, imag) for stable output.
struct Spectrum {
  std::vector<Complex> values;

  std::size_t size() const { return values.size(); }
  double max_real() const;
};

Mat mat_exp(const Mat& a);

Spectrum spectrum(const Mat& a);

Mat pinv_svd(const Mat& a, double tol = 0.0);

/// Monic characteristic polynomial det(sI - A), via Hessenberg reduction and
/// the La Budde recurrence.
PolyCoeffs char_poly(const Mat& a);

constexpr int kCharPolyMaxDim = 64;

/// Solves X*B + A*X = C through the Kronecker-vectorized linear system.
Mat solve_sylvester(const Mat& a, const Mat& b, const Mat& c);

Mat kron_product(const Mat& a, const Mat& b);

/// Block Hankel matrix with `depth` block rows; column k stacks seq[k..k+depth-1].
Mat build_hankel(std::span<const Vec> seq, int depth);

/// Lower-triangular banded Toeplitz: (i, j) = first_col[i - j] for 0 <= i - j < len.
Mat build_toeplitz_lower(std::span<const double> first_col, int rows, int cols,
                         bool allow_wide = false);

int numerical_rank(const Mat& a, double tol = 0.0);

/// Threshold used when tol == 0: max(rows, cols) * eps * sigma_max.
double auto_rank_threshold(const Mat& a);

/// Companion matrix with superdiagonal identity and last row -c_n .. -c_1.
Mat companion_bottom(std::span<const double> c_tail);

/// Evaluates a polynomial at a square matrix (Horner).
Mat poly_eval_matrix(const PolyCoeffs& p, const Mat& a);

double max_real_eig(const Mat& a);

Mat he(const Mat& a);
Mat sk(const Mat& a);

/// Matches two multisets of complex numbers greedily by nearest distance and
/// returns the largest matched distance (infinity on size mismatch).
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b);

}  // namespace iostab
