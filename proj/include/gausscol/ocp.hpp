#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gausscol/linalg.hpp"

namespace gausscol {

enum class DerivativeMode { analytic, finite_difference };

/// Raised for malformed problem definitions or callbacks that violate
/// their contract (wrong output shape, asymmetric Hessian).
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using DynamicsFn = std::function<Vector(const Vector& x, const Vector& u)>;
using JacobianFn = std::function<Matrix(const Vector& x, const Vector& u)>;
using HamiltonianBlockFn = std::function<Matrix(const Vector& x, const Vector& u, const Vector& lambda)>;
using CostFn = std::function<double(const Vector& x)>;
using CostGradientFn = std::function<Vector(const Vector& x)>;
using CostHessianFn = std::function<Matrix(const Vector& x)>;

/// Mayer-form problem: minimize C(x(tf)) subject to x' = f(x, u), x(t0) = x0.
///
/// Second derivatives are those of H = lambda^T f:
///   hess_xx = d2H/dx2 (n x n)
///   hess_xu = d/du (dH/dx) (n x m), the mixed block S; its transpose
///             enters the control-stationarity rows
///   hess_uu = d2H/du2 (m x m)
///
/// Callbacks see physical time units; the (tf - t0)/2 scaling onto [-1, 1]
/// is applied by the transcription.  Callbacks must be reentrant.
struct ProblemSpec {
  std::string name;
  int state_dim = 0;
  int control_dim = 0;
  double t0 = -1.0;
  double tf = 1.0;
  Vector x0;

  DynamicsFn dynamics;
  JacobianFn jac_x;
  JacobianFn jac_u;
  HamiltonianBlockFn hess_xx;
  HamiltonianBlockFn hess_xu;
  HamiltonianBlockFn hess_uu;
  CostFn cost;
  CostGradientFn grad_cost;
  CostHessianFn hess_cost;

  DerivativeMode derivative_mode = DerivativeMode::analytic;

  double time_scale() const { return 0.5 * (tf - t0); }
};

/// Checks dimensions, horizon and that every callback is present.
void validate(const ProblemSpec& spec);

/// Returns a copy in which every missing derivative callback is replaced
/// by central differences (step 1e-6 (1 + |component|), 1e-4 for nested
/// second differences).  Q, R and the cost Hessian are symmetrized.  Sets
/// derivative_mode to finite_difference if anything was filled in.
ProblemSpec with_finite_differences(ProblemSpec spec);

/// All derivative blocks of the problem at one point, in physical units.
struct PointEvaluation {
  Vector f;
  Matrix A;  // df/dx
  Matrix B;  // df/du
  Matrix Q;  // d2H/dx2
  Matrix S;  // d/du dH/dx
  Matrix R;  // d2H/du2
};

/// Evaluates dynamics and derivative blocks, checking output shapes and
/// (in analytic mode) Hessian symmetry to 1e-10.
PointEvaluation evaluate_point(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda);

/// grad_x H = A^T lambda
Vector grad_x_hamiltonian(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda);
/// grad_u H = B^T lambda
Vector grad_u_hamiltonian(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda);

/// t = t0 + (tau + 1)(tf - t0)/2.  Throws std::domain_error for tau outside [-1, 1].
double map_time(const ProblemSpec& spec, double tau);
/// Inverse of map_time.
double unmap_time(const ProblemSpec& spec, double t);

/// Closed-form optimal trajectory, control and costate in physical time.
struct AnalyticSolution {
  std::function<Vector(double t)> state;
  std::function<Vector(double t)> control;
  std::function<Vector(double t)> costate;
  /// Optional analytic x*'(t).
  std::function<Vector(double t)> state_rate;
};

struct BuiltinProblem {
  ProblemSpec spec;
  std::optional<AnalyticSolution> oracle;
  std::string description;
};

/// Names accepted by builtin_problem().
const std::vector<std::string>& builtin_names();

/// Throws std::invalid_argument for an unknown name.
BuiltinProblem builtin_problem(std::string_view name);

/// min -x(2), x' = 2.5(-x + x u - u^2), x(0) = 1 on [0, 2]; registered as
/// "hager-example".
BuiltinProblem builtin_example();

/// Worst deviation between the analytic derivative callbacks and central
/// differences (step 1e-6 (1 + |component|)) at (x, u, lambda).  Entries
/// are compared as |a - fd| / max(1, |a|).
double fd_derivative_check(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda);

}  // namespace gausscol
