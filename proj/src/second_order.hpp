#pragma once

#include <unsupported/Eigen/AutoDiff>

#include "prodyn/types.hpp"

namespace prodyn::detail {

// Value, gradient, and Hessian of a scalar function of a small vector via
// nested forward-mode autodiff. n stays <= 12 here (a 3D point-triangle
// pair), so the quadratic cost per evaluation is irrelevant.
struct SecondOrder {
  double value = 0.0;
  VecX gradient;
  MatX hessian;
};

using AdScalar = Eigen::AutoDiffScalar<VecX>;
using AdVector = Eigen::Matrix<AdScalar, Eigen::Dynamic, 1>;
using Ad2Scalar = Eigen::AutoDiffScalar<AdVector>;
using Ad2Vector = Eigen::Matrix<Ad2Scalar, Eigen::Dynamic, 1>;

template <typename F>
SecondOrder secondOrder(F&& f, const VecX& x) {
  const int n = static_cast<int>(x.size());
  Ad2Vector xa(n);
  for (int i = 0; i < n; ++i) {
    xa[i].value() = AdScalar(x[i], n, i);
    xa[i].derivatives().resize(n);
    for (int j = 0; j < n; ++j) xa[i].derivatives()[j] = AdScalar(i == j ? 1.0 : 0.0, n, j);
  }
  const Ad2Scalar result = f(xa);
  SecondOrder out;
  out.value = result.value().value();
  out.gradient.resize(n);
  out.hessian.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.gradient[i] = result.value().derivatives()[i];
    for (int j = 0; j < n; ++j) out.hessian(i, j) = result.derivatives()[i].derivatives()[j];
  }
  return out;
}

}  // namespace prodyn::detail
