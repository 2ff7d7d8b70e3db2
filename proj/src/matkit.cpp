#include "iostab/matkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "iostab/error.hpp"

namespace iostab {

namespace {

void require_square(const Mat& a, const char* op) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorKind::kDimension, std::string(op) + ": expected a non-empty square matrix, got " +
                                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

// Parlett-Reinsch diagonal balancing (radix 2, no permutations). Returns
// D^-1 A D; the spectrum is unchanged and the norm is usually much smaller.
Mat balance(Mat a) {
  const Eigen::Index n = a.rows();
  constexpr double kRadix = 2.0;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / kRadix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= kRadix;
        c *= kRadix * kRadix;
      }
      g = r * kRadix;
      while (c >= g) {
        f /= kRadix;
        c /= kRadix * kRadix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return a;
}

// Pade(13) coefficients for exp, Higham (2005).
constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

PolyCoeffs PolyCoeffs::monic(std::span<const double> tail) {
  PolyCoeffs p;
  p.coeffs.reserve(tail.size() + 1);
  p.coeffs.push_back(1.0);
  p.coeffs.insert(p.coeffs.end(), tail.begin(), tail.end());
  return p;
}

bool PolyCoeffs::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
}

PolyCoeffs PolyCoeffs::trimmed() const {
  PolyCoeffs p;
  auto first = std::find_if(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; });
  if (first == coeffs.end()) {
    p.coeffs = {0.0};
  } else {
    p.coeffs.assign(first, coeffs.end());
  }
  return p;
}

Complex PolyCoeffs::operator()(Complex s) const {
  Complex acc = 0.0;
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

double PolyCoeffs::operator()(double s) const {
  double acc = 0.0;
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

double PolyCoeffs::norm() const {
  double acc = 0.0;
  for (double c : coeffs) acc += c * c;
  return std::sqrt(acc);
}

PolyCoeffs poly_multiply(const PolyCoeffs& a, const PolyCoeffs& b) {
  PolyCoeffs out;
  out.coeffs.assign(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs.size(); ++j) out.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
  }
  return out;
}

double Spectrum::max_real() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : values) m = std::max(m, v.real());
  return m;
}

Mat mat_exp(const Mat& a) {
  require_square(a, "mat_exp");
  if (!a.allFinite()) throw Error(ErrorKind::kInput, "mat_exp: non-finite entries");
  const Eigen::Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Mat as = a / std::ldexp(1.0, squarings);

  const Mat ident = Mat::Identity(n, n);
  const Mat a2 = as * as;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const auto& b = kPade13;
  Mat u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  Mat u = as * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  Mat v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  Mat v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

Spectrum spectrum(const Mat& a) {
  require_square(a, "spectrum");
  const Mat balanced = balance(a);
  Eigen::EigenSolver<Mat> solver;
  solver.compute(balanced, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kSolver, "spectrum: QR iteration did not converge within " +
                                        std::to_string(40 * a.rows()) + " iterations");
  }
  Spectrum s;
  const auto& ev = solver.eigenvalues();
  s.values.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) s.values.push_back(ev(i));
  std::sort(s.values.begin(), s.values.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return s;
}

double auto_rank_threshold(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() * smax;
}

Mat pinv_svd(const Mat& a, double tol) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double threshold =
      tol > 0.0 ? tol
                : static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() * smax;
  Vec inv = Vec::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

PolyCoeffs char_poly(const Mat& a) {
  require_square(a, "char_poly");
  const Eigen::Index n = a.rows();
  if (n > kCharPolyMaxDim) {
    throw Error(ErrorKind::kCapacity, "char_poly: dimension " + std::to_string(n) + " exceeds " +
                                          std::to_string(kCharPolyMaxDim));
  }
  Mat h;
  if (n > 2) {
    Eigen::HessenbergDecomposition<Mat> hess(balance(a));
    h = hess.matrixH();
  } else {
    h = a;
  }
  // p[i] holds p_i in ascending powers; p_i is the char poly of the leading i x i block.
  std::vector<std::vector<double>> p(static_cast<std::size_t>(n) + 1);
  p[0] = {1.0};
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double alpha = h(i - 1, i - 1);
    std::vector<double> cur(static_cast<std::size_t>(i) + 1, 0.0);
    const auto& prev = p[static_cast<std::size_t>(i) - 1];
    for (std::size_t k = 0; k < prev.size(); ++k) {
      cur[k + 1] += prev[k];
      cur[k] -= alpha * prev[k];
    }
    double beta_prod = 1.0;
    for (Eigen::Index m = 1; m < i; ++m) {
      beta_prod *= h(i - m, i - m - 1);
      const double coef = h(i - m - 1, i - 1) * beta_prod;
      const auto& older = p[static_cast<std::size_t>(i - m - 1)];
      for (std::size_t k = 0; k < older.size(); ++k) cur[k] -= coef * older[k];
    }
    p[static_cast<std::size_t>(i)] = std::move(cur);
  }
  PolyCoeffs out;
  out.coeffs.assign(p.back().rbegin(), p.back().rend());
  return out;
}

Mat solve_sylvester(const Mat& a, const Mat& b, const Mat& c) {
  require_square(a, "solve_sylvester(A)");
  require_square(b, "solve_sylvester(B)");
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw Error(ErrorKind::kDimension, "solve_sylvester: C must be " + std::to_string(a.rows()) + "x" +
                                           std::to_string(b.rows()));
  }
  const Eigen::Index r = a.rows();
  const Eigen::Index k = b.rows();
  if (r * k > 4096) throw Error(ErrorKind::kCapacity, "solve_sylvester: Kronecker system too large");
  const Mat sys = kron_product(b.transpose(), Mat::Identity(r, r)) + kron_product(Mat::Identity(k, k), a);
  Eigen::FullPivLU<Mat> lu(sys);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::kNoUniqueSolution, "solve_sylvester: spectra of A and -B overlap");
  }
  const Vec rhs = Eigen::Map<const Vec>(c.data(), c.size());
  const Vec x = lu.solve(rhs);
  return Eigen::Map<const Mat>(x.data(), r, k);
}

Mat kron_product(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Mat build_hankel(std::span<const Vec> seq, int depth) {
  if (depth < 1 || static_cast<int>(seq.size()) < depth) {
    throw Error(ErrorKind::kDimension, "build_hankel: sequence of length " + std::to_string(seq.size()) +
                                           " is shorter than depth " + std::to_string(depth));
  }
  const Eigen::Index m = seq.front().size();
  const int cols = static_cast<int>(seq.size()) - depth + 1;
  Mat h(depth * m, cols);
  for (int k = 0; k < cols; ++k) {
    for (int d = 0; d < depth; ++d) {
      const Vec& v = seq[static_cast<std::size_t>(k + d)];
      if (v.size() != m) throw Error(ErrorKind::kDimension, "build_hankel: ragged sequence");
      h.block(d * m, k, m, 1) = v;
    }
  }
  return h;
}

Mat build_toeplitz_lower(std::span<const double> first_col, int rows, int cols, bool allow_wide) {
  if (static_cast<int>(first_col.size()) > rows) {
    throw Error(ErrorKind::kDimension, "build_toeplitz_lower: first column longer than row count");
  }
  if (cols > rows && !allow_wide) {
    throw Error(ErrorKind::kDimension, "build_toeplitz_lower: more columns than rows");
  }
  const int len = static_cast<int>(first_col.size());
  Mat t = Mat::Zero(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int k = 0; k < len && j + k < rows; ++k) t(j + k, j) = first_col[static_cast<std::size_t>(k)];
  }
  return t;
}

int numerical_rank(const Mat& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  const double threshold =
      tol > 0.0 ? tol
                : static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() *
                      (sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return rank;
}

Mat companion_bottom(std::span<const double> c_tail) {
  const auto n = static_cast<Eigen::Index>(c_tail.size());
  Mat a = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) a(n - 1, j) = -c_tail[static_cast<std::size_t>(n - 1 - j)];
  return a;
}

Mat poly_eval_matrix(const PolyCoeffs& p, const Mat& a) {
  require_square(a, "poly_eval_matrix");
  Mat acc = Mat::Zero(a.rows(), a.cols());
  for (double c : p.coeffs) {
    acc = acc * a;
    acc.diagonal().array() += c;
  }
  return acc;
}

double max_real_eig(const Mat& a) { return spectrum(a).max_real(); }

Mat he(const Mat& a) { return a + a.transpose(); }
Mat sk(const Mat& a) { return a - a.transpose(); }

double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - b[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    used[best_j] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace iostab
