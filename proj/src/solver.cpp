#include "gausscol/solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace gausscol {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::non_convergence:
      return "non_convergence";
    case SolveStatus::singular_jacobian:
      return "singular_jacobian";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Interpolation

BarycentricInterpolant::BarycentricInterpolant(const GaussRule& rule, NodeSet basis)
    : weights_(gauss_barycentric_weights(rule, basis)) {
  const auto span = node_span(rule, basis);
  nodes_.assign(span.begin(), span.end());
}

Vector BarycentricInterpolant::operator()(const Matrix& nodal_values, double tau) const {
  if (!(tau >= -1.0 && tau <= 1.0)) throw std::domain_error("interpolate: tau outside [-1, 1]");
  if (nodal_values.rows() != weights_.size()) throw std::invalid_argument("interpolate: wrong number of nodal rows");
  Vector numer = Vector::Zero(nodal_values.cols());
  double denom = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double diff = tau - nodes_[j];
    if (diff == 0.0) return nodal_values.row(static_cast<Eigen::Index>(j)).transpose();
    const double c = weights_[static_cast<Eigen::Index>(j)] / diff;
    numer += c * nodal_values.row(static_cast<Eigen::Index>(j)).transpose();
    denom += c;
  }
  return numer / denom;
}

Vector interpolate(const GaussRule& rule, const Matrix& nodal_values, NodeSet basis, double tau) {
  return BarycentricInterpolant(rule, basis)(nodal_values, tau);
}

// ---------------------------------------------------------------------------
// Initial guesses

DiscreteSolution warm_start_guess(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& coarse) {
  const int n_coarse = coarse.size();
  const GaussRule coarse_rule = gauss_rule(n_coarse);
  const BarycentricInterpolant state(coarse_rule, NodeSet::state);
  const BarycentricInterpolant control(coarse_rule, NodeSet::interior);
  const BarycentricInterpolant costate(coarse_rule, NodeSet::costate);
  const Matrix coarse_states = coarse.X.topRows(n_coarse + 1);

  const int n_col = dm.size();
  DiscreteSolution guess;
  guess.X.resize(n_col + 2, spec.state_dim);
  guess.U.resize(n_col, spec.control_dim);
  guess.Lambda.resize(n_col + 1, spec.state_dim);
  guess.X.row(0) = spec.x0.transpose();
  for (int i = 1; i <= n_col; ++i) {
    const double tau = dm.rule.nodes[i];
    guess.X.row(i) = state(coarse_states, tau).transpose();
    guess.U.row(i - 1) = control(coarse.U, tau).transpose();
    guess.Lambda.row(i - 1) = costate(coarse.Lambda, tau).transpose();
  }
  guess.X.row(n_col + 1) = coarse.X.row(n_coarse + 1);
  guess.Lambda.row(n_col) = coarse.Lambda.row(n_coarse);
  return guess;
}

namespace {

// Newton on T1(X; U) = 0 for X_1..X_N with U held fixed.  Returns false if
// it does not converge; X is left at the last iterate.
bool solve_state_equations(const ProblemSpec& spec, const DiffMatrices& dm, DiscreteSolution& g) {
  constexpr int kMaxIterations = 50;
  const int n_col = dm.size();
  const int n = spec.state_dim;
  const double scale = spec.time_scale();
  const Matrix eye = Matrix::Identity(n, n);

  for (int it = 0; it < kMaxIterations; ++it) {
    Vector r(n * n_col);
    Matrix jac = Matrix::Zero(n * n_col, n * n_col);
    for (int i = 1; i <= n_col; ++i) {
      const Vector x = g.X.row(i).transpose();
      const Vector u = g.U.row(i - 1).transpose();
      r.segment((i - 1) * n, n) = (dm.D.row(i - 1) * g.X.topRows(n_col + 1)).transpose() - scale * spec.dynamics(x, u);
      for (int j = 1; j <= n_col; ++j) jac.block((i - 1) * n, (j - 1) * n, n, n) = dm.D(i - 1, j) * eye;
      jac.block((i - 1) * n, (i - 1) * n, n, n) -= scale * spec.jac_x(x, u);
    }
    if (!r.allFinite()) return false;
    if (r.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + g.X.cwiseAbs().maxCoeff())) return true;
    const DenseLU lu(jac);
    if (lu.singular()) return false;
    const Vector step = lu.solve(r);
    for (int i = 1; i <= n_col; ++i) g.X.row(i) -= step.segment((i - 1) * n, n).transpose();
  }
  return false;
}

// Linear solve of T3 = 0, T4 = 0 for Lambda given X and U.
bool solve_costate_equations(const ProblemSpec& spec, const DiffMatrices& dm, DiscreteSolution& g) {
  const int n_col = dm.size();
  const int n = spec.state_dim;
  const double scale = spec.time_scale();
  const Matrix eye = Matrix::Identity(n, n);

  const Vector l_end = spec.grad_cost(g.X.row(n_col + 1).transpose());
  g.Lambda.row(n_col) = l_end.transpose();
  Matrix k = Matrix::Zero(n * n_col, n * n_col);
  Vector b(n * n_col);
  for (int i = 1; i <= n_col; ++i) {
    const Vector x = g.X.row(i).transpose();
    const Vector u = g.U.row(i - 1).transpose();
    for (int j = 1; j <= n_col; ++j) k.block((i - 1) * n, (j - 1) * n, n, n) = dm.Ddag(i - 1, j - 1) * eye;
    k.block((i - 1) * n, (i - 1) * n, n, n) += scale * spec.jac_x(x, u).transpose();
    b.segment((i - 1) * n, n) = -dm.Ddag(i - 1, n_col) * l_end;
  }
  const DenseLU lu(k);
  if (lu.singular()) return false;
  const Vector l = lu.solve(b);
  for (int i = 1; i <= n_col; ++i) g.Lambda.row(i - 1) = l.segment((i - 1) * n, n).transpose();
  return l.allFinite();
}

}  // namespace

DiscreteSolution forward_backward_guess(const ProblemSpec& spec, const DiffMatrices& dm, int passes) {
  const int n_col = dm.size();
  DiscreteSolution g;
  g.X = spec.x0.transpose().replicate(n_col + 2, 1);
  g.U = Matrix::Zero(n_col, spec.control_dim);
  g.Lambda = spec.grad_cost(spec.x0).transpose().replicate(n_col + 1, 1);

  for (int pass = 0; pass < passes; ++pass) {
    const DiscreteSolution before = g;
    try {
      if (!solve_state_equations(spec, dm, g)) return before;
      g.X.row(n_col + 1) = terminal_state(dm.rule.weights, g.X, g.U, spec).transpose();
      if (!solve_costate_equations(spec, dm, g)) return before;
    } catch (const std::exception&) {
      return before;
    }
    for (int i = 1; i <= n_col; ++i) {
      const EndpointControl c =
          endpoint_control(spec, g.X.row(i).transpose(), g.Lambda.row(i - 1).transpose(), g.U.row(i - 1).transpose());
      if (c.available) g.U.row(i - 1) = c.u.transpose();
    }
  }
  return g;
}

DiscreteSolution make_initial_guess(const ProblemSpec& spec, const DiffMatrices& dm, const SolverOptions& opts) {
  const int n_col = dm.size();
  switch (opts.initial_guess) {
    case InitialGuess::oracle:
      if (!opts.oracle) throw std::invalid_argument("oracle initial guess requested without an oracle");
      return sample_oracle(spec, *opts.oracle, dm.rule);
    case InitialGuess::warm_start:
      if (!opts.warm_start) throw std::invalid_argument("warm start requested without a coarse solution");
      return warm_start_guess(spec, dm, *opts.warm_start);
    case InitialGuess::forward_backward:
      return forward_backward_guess(spec, dm, opts.forward_backward_passes);
    case InitialGuess::constant:
      break;
  }
  DiscreteSolution guess;
  guess.X = spec.x0.transpose().replicate(n_col + 2, 1);
  guess.U = Matrix::Zero(n_col, spec.control_dim);
  const Vector g = spec.grad_cost(spec.x0);
  guess.Lambda = g.transpose().replicate(n_col + 1, 1);
  return guess;
}

// ---------------------------------------------------------------------------
// Newton

namespace {

double safe_residual_norm(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& sol) {
  try {
    const double r = residual(spec, dm, sol).norm_inf();
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  } catch (const EvaluationError&) {
    return std::numeric_limits<double>::infinity();
  }
}

double min_hessian_eigenvalue(const ProblemSpec& spec, const DiscreteSolution& sol) {
  const int n = spec.state_dim;
  const int m = spec.control_dim;
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= sol.size(); ++i) {
    const Vector x = sol.X.row(i).transpose();
    const Vector u = sol.U.row(i - 1).transpose();
    const Vector l = sol.Lambda.row(i - 1).transpose();
    Eigen::MatrixXd h(n + m, n + m);
    h.topLeftCorner(n, n) = spec.hess_xx(x, u, l);
    h.topRightCorner(n, m) = spec.hess_xu(x, u, l);
    h.bottomLeftCorner(m, n) = h.topRightCorner(n, m).transpose();
    h.bottomRightCorner(m, m) = spec.hess_uu(x, u, l);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, eig.eigenvalues().minCoeff());
  }
  const Vector x_end = sol.X.row(sol.size() + 1).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(spec.hess_cost(x_end)), Eigen::EigenvaluesOnly);
  return std::min(lowest, eig.eigenvalues().minCoeff());
}

void finish(const ProblemSpec& spec, const DiffMatrices& dm, const SolverOptions& opts, SolveResult& result) {
  const DiscreteSolution& sol = result.solution;
  const int n_col = dm.size();
  const Vector x_start = sol.X.row(0).transpose();
  const Vector x_end = sol.X.row(n_col + 1).transpose();
  const Vector l_end = sol.Lambda.row(n_col).transpose();
  const BarycentricInterpolant costate(dm.rule, NodeSet::costate);
  const Vector l_start = costate(sol.Lambda, -1.0);

  if (opts.endpoint_mode == EndpointMode::minimum_principle) {
    result.control_start = endpoint_control(spec, x_start, l_start, sol.U.row(0).transpose());
    result.control_end = endpoint_control(spec, x_end, l_end, sol.U.row(n_col - 1).transpose());
  } else {
    const BarycentricInterpolant control(dm.rule, NodeSet::interior);
    for (auto [slot, tau] : {std::pair{&result.control_start, -1.0}, std::pair{&result.control_end, 1.0}}) {
      slot->available = true;
      slot->u = control(sol.U, tau);
      slot->message = "polynomial extrapolation of interior controls";
    }
  }
  try {
    result.min_hessian_eigenvalue = min_hessian_eigenvalue(spec, sol);
  } catch (const std::exception&) {
    result.min_hessian_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

SolveResult newton_solve(const ProblemSpec& spec, const DiffMatrices& dm, const SolverOptions& opts) {
  validate(spec);
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("newton_solve: tolerance must be positive");
  if (opts.max_iterations < 1) throw std::invalid_argument("newton_solve: max_iterations must be >= 1");

  const int n_col = dm.size();
  SolveResult result;
  DiscreteSolution current = make_initial_guess(spec, dm, opts);
  current.X.row(0) = spec.x0.transpose();
  Vector theta = pack_unknowns(current);

  ResidualVector res = residual(spec, dm, current);
  double r = res.norm_inf();
  result.residual_history.push_back(r);
  int iterations = 0;

  auto record = [&](SolveStatus status, std::string message) {
    current.residual_norm = r;
    current.iterations = iterations;
    result.status = status;
    result.solution = current;
    result.message = std::move(message);
  };

  while (true) {
    if (r <= opts.tolerance) {
      record(SolveStatus::converged, "residual below tolerance");
      break;
    }
    if (iterations >= opts.max_iterations) {
      record(SolveStatus::non_convergence, "iteration budget exhausted");
      break;
    }
    const Matrix jac = jacobian(spec, dm, current);
    const DenseLU lu(jac, opts.pivot_tolerance);
    if (lu.singular()) {
      record(SolveStatus::singular_jacobian,
             "Jacobian pivot ratio " + std::to_string(lu.pivot_ratio()) + " at iteration " + std::to_string(iterations));
      break;
    }
    const Vector step = -lu.solve(res.pack());

    double alpha = 1.0;
    bool accepted = false;
    DiscreteSolution trial;
    double r_trial = 0.0;
    while (alpha >= opts.min_step) {
      trial = unpack_unknowns(theta + alpha * step, spec.x0, n_col, spec.control_dim);
      r_trial = safe_residual_norm(spec, dm, trial);
      if (r_trial <= (1.0 - opts.armijo * alpha) * r) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack_factor;
    }
    if (!accepted) {
      record(SolveStatus::non_convergence, "line search failed at iteration " + std::to_string(iterations));
      break;
    }
    theta += alpha * step;
    current = std::move(trial);
    res = residual(spec, dm, current);
    r = res.norm_inf();
    ++iterations;
    result.residual_history.push_back(r);
  }

  finish(spec, dm, opts, result);
  return result;
}

SolveResult newton_solve(const ProblemSpec& spec, int n_collocation, const SolverOptions& opts) {
  if (n_collocation < 1) throw std::invalid_argument("newton_solve: N must be >= 1");
  return newton_solve(spec, build_diff_matrices(n_collocation), opts);
}

EndpointControl endpoint_control(const ProblemSpec& spec, const Vector& x, const Vector& lambda, const Vector& u_seed) {
  constexpr int kMaxIterations = 50;
  constexpr double kTolerance = 1e-12;
  EndpointControl out;
  Vector u = u_seed;
  try {
    for (int it = 0; it <= kMaxIterations; ++it) {
      const Vector g = grad_u_hamiltonian(spec, x, u, lambda);
      if (g.cwiseAbs().maxCoeff() <= kTolerance) {
        out.available = true;
        out.u = u;
        out.iterations = it;
        out.message = "minimum principle";
        return out;
      }
      if (it == kMaxIterations) break;
      const Matrix r = spec.hess_uu(x, u, lambda);
      const DenseLU lu(r);
      if (lu.singular()) {
        out.message = "singular control Hessian";
        out.u = u;
        out.iterations = it;
        return out;
      }
      u -= lu.solve(g);
    }
  } catch (const std::exception& e) {
    out.message = e.what();
    out.u = u;
    return out;
  }
  out.message = "Newton on grad_u H did not converge";
  out.u = u;
  out.iterations = kMaxIterations;
  return out;
}

}  // namespace gausscol
