#include "iostab/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iostab/error.hpp"

namespace iostab {

namespace {

// Rows are the strictly-upper entries of Sk(Y P^T) as functions of vec(Y)
// (column-major, Y is q x c).
Mat skew_equations(const Mat& phi) {
  const Eigen::Index q = phi.rows();
  const Eigen::Index c = phi.cols();
  Mat e = Mat::Zero(q * (q - 1) / 2, q * c);
  Eigen::Index row = 0;
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = a + 1; b < q; ++b, ++row) {
      for (Eigen::Index k = 0; k < c; ++k) {
        e(row, a + q * k) += phi(b, k);
        e(row, b + q * k) -= phi(a, k);
      }
    }
  }
  return e;
}

Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols) { return Eigen::Map<const Mat>(v.data(), rows, cols); }

double logdet_spd(const Mat& f, bool& ok) {
  const Eigen::LLT<Mat> llt(f);
  ok = llt.info() == Eigen::Success;
  if (!ok) return 0.0;
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

struct Barrier {
  Mat d_r;  // q x r
  Mat p_r;  // q x r
  Mat basis;
  double radius = 0.0;
  Eigen::Index q = 0;
  Eigen::Index r = 0;
  int dim = 0;  // y coordinates; t is index dim

  Mat y_of(const Vec& x) const { return unvec(basis * x.head(dim), q, r); }
  Mat f1(const Vec& x) const {
    const Mat y = y_of(x);
    return -he(d_r * y.transpose()) - x(dim) * Mat::Identity(q, q);
  }
  Mat f2(const Vec& x) const {
    const Mat y = y_of(x);
    return he(y * p_r.transpose()) - x(dim) * Mat::Identity(q, q);
  }
  double ball(const Vec& x) const { return radius * radius - x.head(dim).squaredNorm(); }

  // Barrier objective; +inf outside the domain.
  double value(const Vec& x, double tau) const {
    const double g = ball(x);
    if (!(g > 0.0)) return std::numeric_limits<double>::infinity();
    bool ok1 = false;
    bool ok2 = false;
    const double l1 = logdet_spd(f1(x), ok1);
    if (!ok1) return std::numeric_limits<double>::infinity();
    const double l2 = logdet_spd(f2(x), ok2);
    if (!ok2) return std::numeric_limits<double>::infinity();
    return -tau * x(dim) - l1 - l2 - std::log(g);
  }
};

}  // namespace

Mat skew_free_basis(const Mat& phi) {
  const Eigen::Index total = phi.rows() * phi.cols();
  if (phi.rows() < 2) return Mat::Identity(total, total);
  const Mat e = skew_equations(phi);
  Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeFullV);
  const int rank = numerical_rank(e);
  return svd.matrixV().rightCols(total - rank);
}

Mat project_skew_free(const Mat& z, const Mat& phi) {
  if (phi.rows() < 2) return z;
  const Mat e = skew_equations(phi);
  const Vec zv = Eigen::Map<const Vec>(z.data(), z.size());
  const Vec correction = e.completeOrthogonalDecomposition().solve(e * zv);
  return unvec(zv - correction, z.rows(), z.cols());
}

MarginLmiSolution solve_margin_lmi(const Mat& delta, const Mat& phi, const MarginLmiOptions& opts) {
  if (delta.rows() != phi.rows() || delta.cols() != phi.cols() || phi.rows() == 0 || phi.cols() == 0) {
    throw Error(ErrorKind::kDimension, "solve_margin_lmi: delta and phi must be nonempty and equally sized");
  }
  if (!delta.allFinite() || !phi.allFinite()) throw Error(ErrorKind::kInput, "solve_margin_lmi: non-finite data");
  const Eigen::Index q = phi.rows();
  const Eigen::Index cols = phi.cols();

  MarginLmiSolution out;
  out.radius = opts.radius > 0.0 ? opts.radius : std::sqrt(static_cast<double>(cols));

  // Z components orthogonal to the row space of col(phi, delta) leave every
  // constraint unchanged and only consume the norm budget, so the optimum lies
  // in that row space.
  Mat stacked(2 * q, cols);
  stacked << phi, delta;
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeThinV);
  const int r = numerical_rank(stacked);
  out.compressed = r;
  if (r == 0) {
    out.z = Mat::Zero(q, cols);
    return out;
  }
  const Mat basis_cols = svd.matrixV().leftCols(r);

  Barrier bar;
  bar.q = q;
  bar.r = r;
  bar.d_r = delta * basis_cols;
  bar.p_r = phi * basis_cols;
  bar.basis = skew_free_basis(bar.p_r);
  bar.dim = static_cast<int>(bar.basis.cols());
  bar.radius = out.radius;
  out.free_dim = bar.dim;

  const double scale = (bar.d_r.jacobiSvd().singularValues()(0) + bar.p_r.jacobiSvd().singularValues()(0)) * out.radius;
  const int dim = bar.dim;
  std::vector<Mat> dirs1(static_cast<std::size_t>(dim + 1));
  std::vector<Mat> dirs2(static_cast<std::size_t>(dim + 1));
  for (int i = 0; i < dim; ++i) {
    const Mat yi = unvec(bar.basis.col(i), q, r);
    dirs1[static_cast<std::size_t>(i)] = -he(bar.d_r * yi.transpose());
    dirs2[static_cast<std::size_t>(i)] = he(yi * bar.p_r.transpose());
  }
  dirs1[static_cast<std::size_t>(dim)] = -Mat::Identity(q, q);
  dirs2[static_cast<std::size_t>(dim)] = -Mat::Identity(q, q);

  Vec x = Vec::Zero(dim + 1);
  x(dim) = -1.0;
  const double degree = static_cast<double>(2 * q + 1);
  double tau = scale > 0.0 ? degree / scale : 1.0;
  const double gap_target = opts.gap_rel * (scale > 0.0 ? scale : 1.0);
  auto derivs = opts.parallel ? logdet_derivatives_parallel : logdet_derivatives_serial;

  while (true) {
    // Centering.
    while (true) {
      Vec grad = Vec::Zero(dim + 1);
      Mat hess = Mat::Zero(dim + 1, dim + 1);
      grad(dim) = -tau;
      if (!derivs(bar.f1(x), dirs1, grad, hess) || !derivs(bar.f2(x), dirs2, grad, hess)) {
        throw Error(ErrorKind::kSolver, "solve_margin_lmi: iterate left the barrier domain");
      }
      const double g = bar.ball(x);
      const Vec y = x.head(dim);
      grad.head(dim) += 2.0 * y / g;
      hess.topLeftCorner(dim, dim) += (2.0 / g) * Mat::Identity(dim, dim) + (4.0 / (g * g)) * y * y.transpose();

      const Eigen::LDLT<Mat> ldlt(hess);
      const Vec step = -ldlt.solve(grad);
      const double decrement = -grad.dot(step);
      const double f0 = bar.value(x, tau);
      // Below the rounding floor of f the decrement carries no information;
      // at large tau that floor dominates the absolute 1e-9.
      const double floor = std::max(1e-9, 256.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0)));
      if (!(decrement > floor) || !step.allFinite()) break;

      if (++out.newton_steps > opts.max_newton) {
        std::ostringstream msg;
        msg << "solve_margin_lmi: no convergence after " << opts.max_newton << " Newton steps (t = " << x(dim)
            << ", tau = " << tau << ", decrement = " << decrement << ")";
        throw Error(ErrorKind::kSolver, msg.str());
      }
      double s = 1.0;
      bool moved = false;
      for (int halving = 0; halving < 60; ++halving, s *= 0.5) {
        const Vec trial = x + s * step;
        const double ft = bar.value(trial, tau);
        if (std::isfinite(ft) && ft <= f0 - 0.25 * s * decrement) {
          x = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    ++out.outer_steps;
    out.gap_bound = degree / tau;
    if (out.gap_bound < gap_target) break;
    tau *= opts.tau_growth;
  }

  out.t = x(dim);
  out.z = project_skew_free(bar.y_of(x) * basis_cols.transpose(), phi);
  return out;
}

}  // namespace iostab
