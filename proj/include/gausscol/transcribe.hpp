#pragma once

#include <array>
#include <span>

#include "gausscol/diffmat.hpp"
#include "gausscol/linalg.hpp"
#include "gausscol/ocp.hpp"

namespace gausscol {

/// Callback failure at a collocation point; index is the node index i
/// (N + 1 for the terminal state).
class EvaluationError : public ProblemError {
 public:
  EvaluationError(int index, const std::string& what);
  int index() const { return index_; }

 private:
  int index_;
};

/// Discrete state, control and costate at the Gauss nodes.
///
///   X       (N+2) x n, rows X_0..X_{N+1}; X_0 is the fixed initial state
///   U       N x m,     rows U_1..U_N
///   Lambda  (N+1) x n, rows Lambda_1..Lambda_{N+1}
struct DiscreteSolution {
  Matrix X;
  Matrix U;
  Matrix Lambda;
  double residual_norm = 0.0;
  int iterations = 0;

  int size() const { return static_cast<int>(U.rows()); }
};

/// The five blocks of the first-order system T(X, U, Lambda).
struct ResidualVector {
  Matrix T1;  // N x n, collocated dynamics
  Vector T2;  // n, quadrature propagation to X_{N+1}
  Matrix T3;  // N x n, discrete costate equation
  Vector T4;  // n, terminal costate condition
  Matrix T5;  // N x m, control stationarity

  /// Packed order T1_1..T1_N, T2, T3_1..T3_N, T4, T5_1..T5_N; length n(2N+2) + mN.
  Vector pack() const;
  static ResidualVector unpack(const Vector& packed, int n_collocation, int state_dim, int control_dim);

  /// Sup over the 3N + 2 node blocks of their Euclidean norm.
  double norm_inf() const;
  /// Per-block version of norm_inf(), indexed T1..T5 as 0..4.
  std::array<double, 5> block_norms() const;
};

/// Packed size n(2N+2) + mN of both the unknown and residual vectors.
Eigen::Index system_size(int n_collocation, int state_dim, int control_dim);

/// Unknowns packed as X_1..X_{N+1}, U_1..U_N, Lambda_1..Lambda_{N+1}.
Vector pack_unknowns(const DiscreteSolution& sol);
/// Inverse of pack_unknowns; X_0 is set from x0.
DiscreteSolution unpack_unknowns(const Vector& theta, const Vector& x0, int n_collocation, int control_dim);

/// T(X, U, Lambda) with dynamics scaled by (tf - t0)/2.
ResidualVector residual(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& sol);

/// Dense Jacobian of the packed residual with respect to the packed unknowns.
Matrix jacobian(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& sol);

/// Lambda_i = lambda_i / omega_i + lambda_{N+1} (1 <= i <= N), Lambda_{N+1} = lambda_{N+1}.
/// lambda_raw rows 1..N are multipliers of the collocated dynamics, row N+1
/// the multiplier of the X_{N+1} equation.
Matrix kkt_transform(std::span<const double> weights, const Matrix& lambda_raw);
/// lambda_i = omega_i (Lambda_i - Lambda_{N+1}), lambda_{N+1} = Lambda_{N+1}.
Matrix kkt_inverse_transform(std::span<const double> weights, const Matrix& costate);

/// X_0 + sum_j omega_j (tf - t0)/2 f(X_j, U_j).
Vector terminal_state(std::span<const double> weights, const Matrix& X, const Matrix& U, const ProblemSpec& spec);

/// Samples an analytic solution at the nodes (X at tau_0..tau_{N+1}, U at
/// tau_1..tau_N, Lambda at tau_1..tau_{N+1}).
DiscreteSolution sample_oracle(const ProblemSpec& spec, const AnalyticSolution& oracle, const GaussRule& rule);

}  // namespace gausscol
