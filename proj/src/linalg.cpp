#include "gausscol/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace gausscol {

DenseLU::DenseLU(const Matrix& a, double pivot_tolerance) {
  if (a.rows() != a.cols() || a.rows() == 0) throw std::invalid_argument("DenseLU: matrix must be square and nonempty");
  if (!a.allFinite()) {
    singular_ = true;
    return;
  }
  lu_.compute(a);
  const auto pivots = lu_.matrixLU().diagonal().cwiseAbs();
  const double largest = pivots.maxCoeff();
  pivot_ratio_ = largest > 0.0 ? pivots.minCoeff() / largest : 0.0;
  singular_ = !(pivot_ratio_ >= pivot_tolerance);
}

Vector DenseLU::solve(const Vector& b) const {
  if (singular_) throw std::logic_error("DenseLU::solve on a singular factorization");
  return lu_.solve(b);
}

Matrix DenseLU::inverse() const {
  if (singular_) throw std::logic_error("DenseLU::inverse on a singular factorization");
  return lu_.inverse();
}

}  // namespace gausscol
