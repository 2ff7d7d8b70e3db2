#include "iostab/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iostab/error.hpp"

namespace iostab {

DiffOpModel::DiffOpModel(int n, int m, int p, std::vector<Mat> a_coef, std::vector<Mat> b_coef)
    : n_(n), m_(m), p_(p), a_coef_(std::move(a_coef)), b_coef_(std::move(b_coef)) {
  if (n < 1 || m < 1 || p < 1) throw Error(ErrorKind::kDimension, "DiffOpModel: n, m, p must be >= 1");
  if (static_cast<int>(a_coef_.size()) != n || static_cast<int>(b_coef_.size()) != n) {
    throw Error(ErrorKind::kDimension, "DiffOpModel: expected " + std::to_string(n) + " coefficient blocks");
  }
  for (int i = 0; i < n; ++i) {
    const auto& ai = a_coef_[static_cast<std::size_t>(i)];
    const auto& bi = b_coef_[static_cast<std::size_t>(i)];
    if (ai.rows() != p || ai.cols() != p) {
      throw Error(ErrorKind::kDimension, "DiffOpModel: A" + std::to_string(i + 1) + " must be p x p");
    }
    if (bi.rows() != p || bi.cols() != m) {
      throw Error(ErrorKind::kDimension, "DiffOpModel: B" + std::to_string(i + 1) + " must be p x m");
    }
    if (!ai.allFinite() || !bi.allFinite()) throw Error(ErrorKind::kInput, "DiffOpModel: non-finite coefficient");
  }
}

DiffOpModel DiffOpModel::siso(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kDimension, "DiffOpModel::siso: a and b lengths differ");
  std::vector<Mat> ac;
  std::vector<Mat> bc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ac.push_back(Mat::Constant(1, 1, a[i]));
    bc.push_back(Mat::Constant(1, 1, b[i]));
  }
  return DiffOpModel(static_cast<int>(a.size()), 1, 1, std::move(ac), std::move(bc));
}

PolyCoeffs DiffOpModel::denominator() const {
  if (!is_siso()) throw Error(ErrorKind::kDimension, "denominator: SISO models only");
  std::vector<double> tail;
  for (const auto& a : a_coef_) tail.push_back(a(0, 0));
  return PolyCoeffs::monic(tail);
}

PolyCoeffs DiffOpModel::numerator() const {
  if (!is_siso()) throw Error(ErrorKind::kDimension, "numerator: SISO models only");
  PolyCoeffs p;
  for (const auto& b : b_coef_) p.coeffs.push_back(b(0, 0));
  return p;
}

void StateSpace::validate() const {
  if (a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.rows()) {
    throw Error(ErrorKind::kDimension, "StateSpace: incompatible A, B, C dimensions");
  }
}

StateSpace realize_observability_canonical(const DiffOpModel& model) {
  const int n = model.n();
  const int m = model.m();
  const int p = model.p();
  StateSpace ss;
  ss.a = Mat::Zero(p * n, p * n);
  ss.b = Mat::Zero(p * n, m);
  ss.c = Mat::Zero(p, p * n);
  for (int i = 1; i < n; ++i) ss.a.block(i * p, (i - 1) * p, p, p) = Mat::Identity(p, p);
  // Block row i carries -A_{n-i} in the last block column and B_{n-i}.
  for (int i = 0; i < n; ++i) {
    ss.a.block(i * p, (n - 1) * p, p, p) = -model.a_coef()[static_cast<std::size_t>(n - 1 - i)];
    ss.b.block(i * p, 0, p, m) = model.b_coef()[static_cast<std::size_t>(n - 1 - i)];
  }
  ss.c.block(0, (n - 1) * p, p, p) = Mat::Identity(p, p);
  return ss;
}

double resultant(const PolyCoeffs& a, const PolyCoeffs& b) {
  const PolyCoeffs at = a.trimmed();
  const PolyCoeffs bt = b.trimmed();
  const int da = at.degree();
  const int db = bt.degree();
  if (at.is_zero() || bt.is_zero()) return 0.0;
  if (da == 0 && db == 0) return 1.0;
  const int dim = da + db;
  Mat syl = Mat::Zero(dim, dim);
  for (int r = 0; r < db; ++r) {
    for (int k = 0; k <= da; ++k) syl(r, r + k) = at.coeffs[static_cast<std::size_t>(k)];
  }
  for (int r = 0; r < da; ++r) {
    for (int k = 0; k <= db; ++k) syl(db + r, r + k) = bt.coeffs[static_cast<std::size_t>(k)];
  }
  return syl.fullPivLu().determinant();
}

CoprimeCheck check_coprime(const PolyCoeffs& a, const PolyCoeffs& b, const NumericPolicy& policy) {
  CoprimeCheck out;
  const PolyCoeffs at = a.trimmed();
  const PolyCoeffs bt = b.trimmed();
  if (at.is_zero() || bt.is_zero()) {
    out.diagnostic = "zero polynomial is never coprime";
    return out;
  }
  out.resultant = resultant(at, bt);
  out.scale = std::pow(at.norm(), bt.degree()) * std::pow(bt.norm(), at.degree());
  out.coprime = std::abs(out.resultant) > policy.resultant_rel_tol * out.scale;
  if (!out.coprime) out.diagnostic = "resultant below tolerance (common root)";
  return out;
}

CoprimeCheck check_coprime_siso(const PolyCoeffs& a, const PolyCoeffs& b, const NumericPolicy& policy) {
  if (b.is_zero()) {
    CoprimeCheck out;
    out.diagnostic = "numerator is identically zero: structurally not coprime";
    return out;
  }
  return check_coprime(a, b, policy);
}

bool check_beta_admissible(const PolyCoeffs& q_r, double beta, const NumericPolicy& policy) {
  double scale = 0.0;
  const int d = q_r.degree();
  for (int k = 0; k <= d; ++k) scale += std::abs(q_r.coeffs[static_cast<std::size_t>(k)]) * std::pow(std::abs(beta), d - k);
  return std::abs(q_r(-beta)) > policy.resultant_rel_tol * scale;
}

bool check_c_nonresonant(const PolyCoeffs& a, const PolyCoeffs& q_r, double beta, const NumericPolicy& policy) {
  const PolyCoeffs shifted = poly_multiply(a, PolyCoeffs{{1.0, beta}});
  return check_coprime(shifted, q_r, policy).coprime;
}

Mat observability_matrix(const StateSpace& ss, int depth) {
  const Eigen::Index p = ss.outputs();
  Mat o(p * depth, ss.states());
  Mat block = ss.c;
  for (int k = 0; k < depth; ++k) {
    o.middleRows(k * p, p) = block;
    block = block * ss.a;
  }
  return o;
}

Mat reachability_matrix(const Mat& a, const Mat& b) {
  const Eigen::Index h = a.rows();
  const Eigen::Index m = b.cols();
  Mat r(h, h * m);
  Mat block = b;
  for (Eigen::Index k = 0; k < h; ++k) {
    r.middleCols(k * m, m) = block;
    block = a * block;
  }
  return r;
}

Mat markov_toeplitz(const StateSpace& ss, int depth) {
  const Eigen::Index p = ss.outputs();
  const Eigen::Index m = ss.inputs();
  Mat mk = Mat::Zero(p * depth, m * depth);
  std::vector<Mat> params;  // C A^k B
  Mat ak_b = ss.b;
  for (int k = 0; k < depth; ++k) {
    params.push_back(ss.c * ak_b);
    ak_b = ss.a * ak_b;
  }
  for (int r = 0; r < depth; ++r) {
    for (int s = 0; s < r; ++s) mk.block(r * p, s * m, p, m) = params[static_cast<std::size_t>(r - s - 1)];
  }
  return mk;
}

InitialConditionMap initial_condition_map(const StateSpace& ss, int n, const Vec& x0, const Vec& u_derivs) {
  ss.validate();
  if (x0.size() != ss.states() || u_derivs.size() != ss.inputs() * n) {
    throw Error(ErrorKind::kDimension, "initial_condition_map: x0 or u_derivs has the wrong length");
  }
  InitialConditionMap out;
  out.obs = observability_matrix(ss, n);
  out.markov = markov_toeplitz(ss, n);
  out.y_derivs = out.obs * x0 + out.markov * u_derivs;
  return out;
}

Vec recover_initial_state(const StateSpace& ss, int n, const Vec& y_derivs, const Vec& u_derivs,
                          const NumericPolicy& policy) {
  const Mat o = observability_matrix(ss, n);
  if (o.rows() != o.cols() || numerical_rank(o, policy.rank_tol) < o.cols()) {
    throw Error(ErrorKind::kNotObservable, "recover_initial_state: observability matrix is not invertible");
  }
  return o.partialPivLu().solve(y_derivs - markov_toeplitz(ss, n) * u_derivs);
}

bool check_minimality_mimo(const StateSpace& ss, int n, const NumericPolicy& policy) {
  const Eigen::Index h = ss.states();
  if (h != ss.outputs() * n) return false;
  if (numerical_rank(reachability_matrix(ss.a, ss.b), policy.rank_tol) != h) return false;
  return numerical_rank(observability_matrix(ss, n), policy.rank_tol) == h;
}

std::string plant_assumption_violation(const DiffOpModel& model, const NumericPolicy& policy) {
  if (model.is_siso()) {
    const auto chk = check_coprime_siso(model.denominator(), model.numerator(), policy);
    if (!chk.coprime) return "numerator and denominator are not coprime (" + chk.diagnostic + ")";
    return {};
  }
  if (!check_minimality_mimo(realize_observability_canonical(model), model.n(), policy)) {
    return "realization is not minimal with state dimension p*n";
  }
  return {};
}

PolyCoeffs poly_from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> acc{1.0};
  for (const auto& r : roots) {
    std::vector<Complex> next(acc.size() + 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= r * acc[i];
    }
    acc = std::move(next);
  }
  PolyCoeffs p;
  for (const auto& c : acc) p.coeffs.push_back(c.real());
  return p;
}

namespace {

std::vector<Complex> draw_roots(std::mt19937_64& rng, int count, double re_range, double im_range) {
  std::uniform_real_distribution<double> re(-re_range, re_range);
  std::uniform_real_distribution<double> im(-im_range, im_range);
  std::bernoulli_distribution pair(0.5);
  std::vector<Complex> roots;
  while (static_cast<int>(roots.size()) < count) {
    if (count - static_cast<int>(roots.size()) >= 2 && pair(rng)) {
      const double x = re(rng);
      const double y = std::abs(im(rng));
      roots.emplace_back(x, y);
      roots.emplace_back(x, -y);
    } else {
      roots.emplace_back(re(rng), 0.0);
    }
  }
  return roots;
}

bool far_from(const std::vector<Complex>& poles, const std::vector<Complex>& excluded, double sep) {
  for (const auto& z : poles) {
    for (const auto& e : excluded) {
      if (std::abs(z - e) < sep) return false;
    }
  }
  return true;
}

}  // namespace

DiffOpModel random_plant(std::mt19937_64& rng, const RandomPlantOptions& opts, const NumericPolicy& policy) {
  const int n = opts.n;
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    if (opts.m == 1 && opts.p == 1) {
      const auto poles = draw_roots(rng, n, opts.re_range, opts.im_range);
      const auto zeros = draw_roots(rng, n - 1, opts.re_range, opts.im_range);
      std::uniform_real_distribution<double> gain_mag(0.5, 2.0);
      std::bernoulli_distribution sign(0.5);
      const double gain = gain_mag(rng) * (sign(rng) ? 1.0 : -1.0);
      if (opts.require_unstable &&
          std::none_of(poles.begin(), poles.end(), [](const Complex& z) { return z.real() > 0.05; })) {
        continue;
      }
      if (!far_from(poles, opts.excluded, opts.min_separation)) continue;
      // Zero-pole separation keeps the coprimality margin away from the tolerance.
      if (!far_from(poles, zeros, std::max(opts.min_separation, 1e-3))) continue;
      const PolyCoeffs den = poly_from_roots(poles);
      PolyCoeffs num = poly_from_roots(zeros);
      for (double& c : num.coeffs) c *= gain;
      if (!check_coprime_siso(den, num, policy).coprime) continue;
      std::vector<double> a(den.coeffs.begin() + 1, den.coeffs.end());
      return DiffOpModel::siso(a, num.coeffs);
    }
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<Mat> ac;
    std::vector<Mat> bc;
    for (int i = 0; i < n; ++i) {
      ac.push_back(Mat::NullaryExpr(opts.p, opts.p, [&]() { return coef(rng); }));
      bc.push_back(Mat::NullaryExpr(opts.p, opts.m, [&]() { return coef(rng); }));
    }
    DiffOpModel model(n, opts.m, opts.p, std::move(ac), std::move(bc));
    const StateSpace ss = realize_observability_canonical(model);
    if (!check_minimality_mimo(ss, n, policy)) continue;
    const Spectrum sp = spectrum(ss.a);
    if (opts.require_unstable && sp.max_real() <= 0.05) continue;
    if (sp.max_real() > opts.re_range) continue;
    if (!far_from(sp.values, opts.excluded, opts.min_separation)) continue;
    return model;
  }
  throw Error(ErrorKind::kInput, "random_plant: no admissible plant after " + std::to_string(opts.max_attempts) +
                                     " attempts");
}

}  // namespace iostab
