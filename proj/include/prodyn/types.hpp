#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace prodyn {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using MatXi = Eigen::MatrixXi;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Small geometry types for runtime dimension d in {2,3}. Fixed max size,
// so no heap traffic in element loops.
using VecD = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using VecDp1 = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

// Errors that carry a machine-parsable category for CLI exit codes.
// kConfig -> exit 2, kNumerical -> exit 3.
enum class ErrorKind { kConfig, kNumerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error configError(const std::string& what) {
  return Error(ErrorKind::kConfig, what);
}
inline Error numericalError(const std::string& what) {
  return Error(ErrorKind::kNumerical, what);
}

}  // namespace prodyn
