#pragma once

#include <Eigen/Dense>

namespace gausscol {

using Vector = Eigen::VectorXd;
/// Dense row-major storage; orders here stay in the low thousands.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// LU with partial pivoting plus a pivot-ratio singularity test.
///
/// The factorization is declared singular when the smallest |U_ii| falls
/// below pivot_tolerance times the largest |U_ii|.
class DenseLU {
 public:
  explicit DenseLU(const Matrix& a, double pivot_tolerance = 1e-14);

  bool singular() const { return singular_; }
  /// min |U_ii| / max |U_ii|
  double pivot_ratio() const { return pivot_ratio_; }

  Vector solve(const Vector& b) const;
  Matrix inverse() const;

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool singular_ = false;
  double pivot_ratio_ = 0.0;
};

}  // namespace gausscol
