#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gausscol/diffmat.hpp"
#include "gausscol/ocp.hpp"
#include "gausscol/transcribe.hpp"

namespace gausscol {

enum class InitialGuess {
  forward_backward,  // see forward_backward_guess()
  constant,          // X_i = x0, U_i = 0, Lambda_i = grad C(x0)
  oracle,            // analytic solution sampled at the nodes
  warm_start,        // interpolate a solution computed at another N
};

enum class EndpointMode { minimum_principle, interpolation };

enum class SolveStatus { converged, non_convergence, singular_jacobian };

const char* to_string(SolveStatus status);

struct SolverOptions {
  double tolerance = 1e-10;  // on ResidualVector::norm_inf()
  int max_iterations = 50;
  double backtrack_factor = 0.5;
  double min_step = 1.0 / (1 << 20);
  double armijo = 1e-4;
  double pivot_tolerance = 1e-14;
  InitialGuess initial_guess = InitialGuess::forward_backward;
  int forward_backward_passes = 1;
  std::optional<AnalyticSolution> oracle;     // for InitialGuess::oracle
  std::optional<DiscreteSolution> warm_start; // for InitialGuess::warm_start
  EndpointMode endpoint_mode = EndpointMode::minimum_principle;
};

/// Control at tau = -1 or +1.
struct EndpointControl {
  bool available = false;
  Vector u;
  int iterations = 0;
  std::string message;
};

struct SolveResult {
  SolveStatus status = SolveStatus::non_convergence;
  /// Final iterate; for failures, the iterate with the smallest residual.
  DiscreteSolution solution;
  /// Residual norm before each Newton step and after the last one.
  std::vector<double> residual_history;
  std::string message;

  EndpointControl control_start;
  EndpointControl control_end;

  /// Smallest eigenvalue over the blocks [[Q S]; [S^T R]] at the
  /// collocation points and the cost Hessian.  Reported, never enforced.
  double min_hessian_eigenvalue = 0.0;

  bool converged() const { return status == SolveStatus::converged; }
};

/// Starting point for Newton according to opts.initial_guess.
DiscreteSolution make_initial_guess(const ProblemSpec& spec, const DiffMatrices& dm, const SolverOptions& opts);

/// Decoupled start: with U = 0, solve the collocated state equations
/// (T1 = 0, T2 = 0) for X by Newton, then the linear costate equations
/// (T3 = 0, T4 = 0) for Lambda, then set each U_i from grad_u H = 0.
/// Repeated `passes` times starting from the updated controls.
DiscreteSolution forward_backward_guess(const ProblemSpec& spec, const DiffMatrices& dm, int passes = 1);

/// Interpolates a solution computed at another N onto the nodes of dm:
/// states through the tau_0..tau_N interpolant, controls through the
/// interior one and costates through tau_1..tau_{N+1}.
DiscreteSolution warm_start_guess(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& coarse);

/// Damped Newton on T(X, U, Lambda) = 0 with backtracking on the residual
/// norm.  Failures are reported through SolveResult::status; problem
/// definition errors throw ProblemError.
SolveResult newton_solve(const ProblemSpec& spec, const DiffMatrices& dm, const SolverOptions& opts = {});
SolveResult newton_solve(const ProblemSpec& spec, int n_collocation, const SolverOptions& opts = {});

/// Solves grad_u H(x, u, lambda) = 0 for u by Newton with Jacobian R,
/// starting from u_seed, to |grad_u H| <= 1e-12.
EndpointControl endpoint_control(const ProblemSpec& spec, const Vector& x, const Vector& lambda, const Vector& u_seed);

/// Degree-N (or N-1 for the interior set) Lagrange interpolant in
/// barycentric form over one of the Gauss node sets.
class BarycentricInterpolant {
 public:
  BarycentricInterpolant(const GaussRule& rule, NodeSet basis);

  /// nodal_values has one row per node; returns the interpolated row.
  Vector operator()(const Matrix& nodal_values, double tau) const;
  Eigen::Index node_count() const { return weights_.size(); }

 private:
  std::vector<double> nodes_;
  Vector weights_;
};

/// Barycentric evaluation at tau of the interpolant through nodal_values
/// (one row per node of the chosen set).  Returns the nodal row exactly
/// when tau coincides with a node.  Throws std::domain_error for tau
/// outside [-1, 1].
Vector interpolate(const GaussRule& rule, const Matrix& nodal_values, NodeSet basis, double tau);

}  // namespace gausscol
