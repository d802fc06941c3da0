#pragma once

#include <Eigen/Dense>

#include <limits>

namespace latscope {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline double spectral_norm(const Mat& M) {
  return M.jacobiSvd().singularValues()(0);
}

inline double smallest_singular_value(const Mat& M) {
  auto sv = M.jacobiSvd().singularValues();
  return sv(sv.size() - 1);
}

inline double cond_estimate(const Mat& M) {
  auto sv = M.jacobiSvd().singularValues();
  double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace latscope
