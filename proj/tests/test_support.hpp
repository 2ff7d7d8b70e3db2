#pragma once

#include <random>

#include "iostab/matkit.hpp"

namespace iostab::testing {

inline Mat random_mat(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Mat::NullaryExpr(rows, cols, [&]() { return u(rng); });
}

inline double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace iostab::testing
