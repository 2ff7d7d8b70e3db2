#include <omp.h>

#include "iostab/lmi.hpp"

namespace iostab {

// With F = L L^T and T_i = L^-1 F_i L^-T, tr(F^-1 F_i F^-1 F_j) = <T_i, T_j>,
// so the Hessian is one Gram product of the flattened T_i.
bool logdet_derivatives_parallel(const Mat& f, const std::vector<Mat>& dirs, Vec& grad, Mat& hess) {
  const Eigen::LLT<Mat> llt(f);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::Index q = f.rows();
  const int count = static_cast<int>(dirs.size());
  Mat flat(q * q, count);
  Vec local_grad(count);
  const auto l = llt.matrixL();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    Mat t = l.solve(dirs[static_cast<std::size_t>(i)]);
    t = l.solve(t.transpose()).eval();
    local_grad(i) = -t.trace();
    flat.col(i) = Eigen::Map<const Vec>(t.data(), q * q);
  }
  grad += local_grad;
  hess.noalias() += flat.transpose() * flat;
  return true;
}

bool logdet_derivatives_serial(const Mat& f, const std::vector<Mat>& dirs, Vec& grad, Mat& hess) {
  const Eigen::LLT<Mat> llt(f);
  if (llt.info() != Eigen::Success) return false;
  const int count = static_cast<int>(dirs.size());
  std::vector<Mat> g(dirs.size());
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = llt.solve(dirs[static_cast<std::size_t>(i)]);
  for (int i = 0; i < count; ++i) {
    const Mat& gi = g[static_cast<std::size_t>(i)];
    grad(i) -= gi.trace();
    for (int j = 0; j < count; ++j) hess(i, j) += (gi * g[static_cast<std::size_t>(j)]).trace();
  }
  return true;
}

}  // namespace iostab
