#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gausscol/ocp.hpp"
#include "gausscol/solver.hpp"
#include "gausscol/transcribe.hpp"

namespace gausscol {

/// Errors at or below this are treated as roundoff-floored and left out of
/// rate fits.
inline constexpr double kErrorFloor = 1e-12;
/// Fewest points a rate fit accepts.
inline constexpr int kMinFitPoints = 3;

/// Discrete sup-norm errors: max over the node set of the Euclidean norm of
/// the per-node difference.  State over tau_0..tau_{N+1}, control over
/// tau_1..tau_N, costate over tau_1..tau_{N+1} (Lambda_0 is not an unknown).
struct SupErrors {
  double state = 0.0;
  double control = 0.0;
  double costate = 0.0;
};

SupErrors sup_error(const DiscreteSolution& solution, const AnalyticSolution& oracle, const ProblemSpec& spec,
                    const GaussRule& rule);

/// Same errors measured on a uniform grid of `points` values of tau through
/// the state and costate interpolants.  Controls are not interpolated.
SupErrors dense_error(const DiscreteSolution& solution, const AnalyticSolution& oracle, const ProblemSpec& spec,
                      const GaussRule& rule, int points = 201);

enum class OmegaKind { state, control };

/// State: sqrt(|X_{N+1}|^2 + sum omega_i |X_i|^2) for rows X_1..X_{N+1}.
/// Control: sqrt(sum omega_i |U_i|^2) for rows U_1..U_N.
double omega_norm(const GaussRule& rule, const Matrix& values, OmegaKind kind);

/// alpha in err ~ c 10^{-alpha N}, by least squares on (N, log10 err) over
/// finite errors above kErrorFloor.  NaN with fewer than kMinFitPoints.
double fit_decay_rate(std::span<const int> n_values, std::span<const double> errors);

struct ConvergenceRow {
  int n = 0;
  double err_state = 0.0;
  double err_control = 0.0;
  double err_costate = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  SupErrors dense;
};

struct FittedRates {
  double state = 0.0;
  double control = 0.0;
  double costate = 0.0;
  bool sufficient = false;  // every variable had kMinFitPoints usable rows
};

struct ConvergenceReport {
  std::string problem_name;
  std::vector<ConvergenceRow> rows;
  FittedRates fitted_rates;
  std::optional<int> floor_n;  // first N with any error <= kErrorFloor
};

/// Fits rates and locates the floor for already-populated rows.
void finalize_report(ConvergenceReport& report);

/// Solves at each N (ascending).  Each solve after the first converged one
/// warm-starts from the previous solution when warm_start is set.  Failed
/// solves become NaN rows and never abort the sweep.
ConvergenceReport run_sweep(const ProblemSpec& spec, const AnalyticSolution& oracle, std::span<const int> n_list,
                            const SolverOptions& opts = {}, bool warm_start = true);

}  // namespace gausscol
