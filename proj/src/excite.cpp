#include "iostab/excite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "iostab/error.hpp"

namespace iostab {

bool check_pe_order(std::span<const Vec> seq, int order, const NumericPolicy& policy) {
  if (order < 1 || static_cast<int>(seq.size()) < order) return false;
  const Mat h = build_hankel(seq, order);
  return numerical_rank(h, policy.rank_tol) == h.rows();
}

int achieved_pe_order(std::span<const Vec> seq, const NumericPolicy& policy) {
  int best = 0;
  for (int l = 1; l <= static_cast<int>(seq.size()); ++l) {
    if (!check_pe_order(seq, l, policy)) break;
    best = l;
  }
  return best;
}

ExcitationPlan gen_pe_sequence(const PeRequest& req, const NumericPolicy& policy) {
  if (req.m < 1 || req.order < 1) throw Error(ErrorKind::kInput, "gen_pe_sequence: m and order must be >= 1");
  if (!(req.amplitude > 0.0)) throw Error(ErrorKind::kInput, "gen_pe_sequence: amplitude must be positive");
  const int window = req.length - req.certify_from;
  if (req.kind == ExcitationKind::kUniform && window < (req.m + 1) * req.order - 1) {
    throw Error(ErrorKind::kExcitation, "gen_pe_sequence: length " + std::to_string(window) +
                                       " cannot be persistently exciting of order " + std::to_string(req.order) +
                                       " (need " + std::to_string((req.m + 1) * req.order - 1) + ")");
  }
  ExcitationPlan plan;
  plan.ts = req.ts;
  plan.seed = req.seed;
  plan.certify_from = req.certify_from;

  if (req.kind == ExcitationKind::kConstant) {
    plan.d.assign(static_cast<std::size_t>(req.length), Vec::Constant(req.m, req.amplitude));
    plan.certified_order = achieved_pe_order(std::span(plan.d).subspan(static_cast<std::size_t>(req.certify_from)), policy);
    plan.attempts = 1;
    return plan;
  }

  std::mt19937_64 rng(req.seed);
  std::uniform_real_distribution<double> draw(-req.amplitude, req.amplitude);
  int best_rank = 0;
  for (int attempt = 1; attempt <= req.max_retries; ++attempt) {
    plan.d.clear();
    for (int k = 0; k < req.length; ++k) plan.d.push_back(Vec::NullaryExpr(req.m, [&]() { return draw(rng); }));
    const auto tail = std::span<const Vec>(plan.d).subspan(static_cast<std::size_t>(req.certify_from));
    const int rank = numerical_rank(build_hankel(tail, req.order), policy.rank_tol);
    best_rank = std::max(best_rank, rank);
    if (rank == req.order * req.m) {
      plan.certified_order = req.order;
      plan.attempts = attempt;
      return plan;
    }
  }
  throw Error(ErrorKind::kExcitation, "gen_pe_sequence: Hankel rank " + std::to_string(best_rank) + " < " +
                                          std::to_string(req.order * req.m) + " after " +
                                          std::to_string(req.max_retries) + " draws");
}

int default_pe_order(int n, int m, int p) { return 2 * ((m + p) * n + m); }

int default_sample_count(int n, int m, int p) {
  const int order = default_pe_order(n, m, p);
  return std::max(8 * n + 4, (m + 1) * order - 1 + order);
}

bool check_sampling_pathology(const std::vector<Complex>& points, double ts, double tol) {
  if (!(ts > 0.0)) throw Error(ErrorKind::kInput, "check_sampling_pathology: T_S must be positive");
  if (points.empty()) return true;
  double im_min = points.front().imag();
  double im_max = im_min;
  for (const auto& z : points) {
    im_min = std::min(im_min, z.imag());
    im_max = std::max(im_max, z.imag());
  }
  const double step = 2.0 * std::numbers::pi / ts;
  const int h_max = static_cast<int>(std::ceil(ts * (im_max - im_min) / (2.0 * std::numbers::pi))) + 1;
  for (const auto& a : points) {
    for (const auto& b : points) {
      if (std::abs(a.real() - b.real()) > tol) continue;
      const double gap = b.imag() - a.imag();
      for (int h = 1; h <= h_max; ++h) {
        if (std::abs(gap - h * step) <= tol || std::abs(gap + h * step) <= tol) return false;
      }
    }
  }
  return true;
}

std::vector<Complex> pathology_points(const Mat& plant_a, const FilterSpec& spec) {
  std::vector<Complex> pts{Complex(-spec.beta(), 0.0)};
  for (const auto& z : spectrum(plant_a).values) pts.push_back(z);
  for (const auto& z : spectrum(companion_bottom(spec.c())).values) pts.push_back(z);
  return pts;
}

const char* to_string(AnnihilatorRoute route) {
  return route == AnnihilatorRoute::kUniformFir ? "uniform-fir" : "general-nullspace";
}

std::vector<double> annihilator_fir(const FilterSpec& spec, double ts) {
  const Mat a_r = companion_bottom(spec.c());
  const PolyCoeffs det = char_poly(mat_exp(a_r.transpose() * ts));
  const PolyCoeffs full = poly_multiply(PolyCoeffs{{1.0, -std::exp(-spec.beta() * ts)}}, det);
  return full.coeffs;
}

Annihilator build_w_uniform(const FilterSpec& spec, double ts, int samples) {
  const int n = spec.n();
  if (samples < n + 2) {
    throw Error(ErrorKind::kDimension, "build_w_uniform: need N >= n + 2 = " + std::to_string(n + 2) + ", got " +
                                           std::to_string(samples));
  }
  if (!(ts > 0.0)) throw Error(ErrorKind::kInput, "build_w_uniform: T_S must be positive");
  Annihilator out;
  out.route = AnnihilatorRoute::kUniformFir;
  out.n = n;
  out.beta = spec.beta();
  out.ts = ts;
  out.fir = annihilator_fir(spec, ts);
  std::vector<double> first_col(out.fir.rbegin(), out.fir.rend());  // w_{n+1}, ..., w_0
  out.w = build_toeplitz_lower(first_col, samples, samples - n - 1);
  return out;
}

Annihilator build_w_general(const FilterSpec& spec, std::span<const double> times, const NumericPolicy& policy) {
  const int n = spec.n();
  const int count = static_cast<int>(times.size());
  if (count < n + 1) throw Error(ErrorKind::kDimension, "build_w_general: need N >= n + 1 sampling times");
  for (int i = 1; i < count; ++i) {
    if (!(times[static_cast<std::size_t>(i)] > times[static_cast<std::size_t>(i - 1)])) {
      throw Error(ErrorKind::kInput, "build_w_general: sampling times must be strictly increasing");
    }
  }
  const Mat a_rt = companion_bottom(spec.c()).transpose();
  // Krylov basis [e_1, A e_1, ..., A^{n-1} e_1]; coordinates of e^{A t} in
  // powers of A follow from its first column.
  Mat krylov(n, n);
  Vec v = Vec::Unit(n, 0);
  for (int j = 0; j < n; ++j) {
    krylov.col(j) = v;
    v = a_rt * v;
  }
  const auto lu = krylov.fullPivLu();
  if (!lu.isInvertible()) throw Error(ErrorKind::kConditioning, "build_w_general: Krylov basis is singular");

  Mat theta(n, count);
  for (int i = 0; i < count; ++i) {
    const double t = times[static_cast<std::size_t>(i)];
    theta.col(i) = lu.solve(mat_exp(a_rt * t).col(0));
    theta(0, i) -= std::exp(-spec.beta() * t);
  }
  Eigen::JacobiSVD<Mat> svd(theta, Eigen::ComputeFullV);
  const int rank = numerical_rank(theta, policy.rank_tol);
  const int nullity = count - rank;
  if (nullity < count - n) {
    throw Error(ErrorKind::kConditioning, "build_w_general: kernel dimension " + std::to_string(nullity) +
                                              " < N - n = " + std::to_string(count - n));
  }
  Annihilator out;
  out.route = AnnihilatorRoute::kGeneralNullspace;
  out.n = n;
  out.beta = spec.beta();
  out.ts = count > 1 ? times[1] - times[0] : 0.0;
  out.w = svd.matrixV().rightCols(nullity);
  return out;
}

Mat apply_annihilator(const Mat& data, const Annihilator& w) {
  if (data.cols() != w.w.rows()) {
    throw Error(ErrorKind::kDimension, "apply_annihilator: data has " + std::to_string(data.cols()) +
                                           " columns, W_N has " + std::to_string(w.w.rows()) + " rows");
  }
  return data * w.w;
}

Mat apply_fir_streaming(const Mat& data, const Annihilator& w) {
  if (w.route != AnnihilatorRoute::kUniformFir) {
    throw Error(ErrorKind::kInput, "apply_fir_streaming: only the uniform route has an FIR form");
  }
  if (data.cols() != w.w.rows()) throw Error(ErrorKind::kDimension, "apply_fir_streaming: column mismatch");
  const int taps = static_cast<int>(w.fir.size());  // n + 2
  const Eigen::Index samples = data.cols();
  const int skip = taps - 1;  // n + 1 transient outputs
  Mat out(data.rows(), samples - skip);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index k = skip; k < samples; ++k) {
      double acc = 0.0;
      for (int i = taps - 1; i >= 0; --i) acc += w.fir[static_cast<std::size_t>(i)] * data(r, k - i);
      out(r, k - skip) = acc;
    }
  }
  return out;
}

}  // namespace iostab
