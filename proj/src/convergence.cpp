#include "gausscol/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gausscol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double row_error(const Matrix& values, Eigen::Index row, const Vector& exact) {
  return (values.row(row).transpose() - exact).norm();
}

}  // namespace

SupErrors sup_error(const DiscreteSolution& solution, const AnalyticSolution& oracle, const ProblemSpec& spec,
                    const GaussRule& rule) {
  const int n_col = rule.n_collocation;
  if (solution.size() != n_col) throw std::invalid_argument("sup_error: solution and rule sizes differ");
  SupErrors e;
  for (int i = 0; i <= n_col + 1; ++i) {
    const double t = map_time(spec, rule.nodes[i]);
    e.state = std::max(e.state, row_error(solution.X, i, oracle.state(t)));
    if (i >= 1 && i <= n_col) e.control = std::max(e.control, row_error(solution.U, i - 1, oracle.control(t)));
    if (i >= 1) e.costate = std::max(e.costate, row_error(solution.Lambda, i - 1, oracle.costate(t)));
  }
  return e;
}

SupErrors dense_error(const DiscreteSolution& solution, const AnalyticSolution& oracle, const ProblemSpec& spec,
                      const GaussRule& rule, int points) {
  if (points < 2) throw std::invalid_argument("dense_error: need at least two points");
  const BarycentricInterpolant state(rule, NodeSet::state);
  const BarycentricInterpolant costate(rule, NodeSet::costate);
  const Matrix states = solution.X.topRows(rule.n_collocation + 1);
  SupErrors e;
  e.control = kNaN;
  for (int k = 0; k < points; ++k) {
    const double tau = std::clamp(-1.0 + 2.0 * k / (points - 1), -1.0, 1.0);
    const double t = map_time(spec, tau);
    e.state = std::max(e.state, (state(states, tau) - oracle.state(t)).norm());
    e.costate = std::max(e.costate, (costate(solution.Lambda, tau) - oracle.costate(t)).norm());
  }
  return e;
}

double omega_norm(const GaussRule& rule, const Matrix& values, OmegaKind kind) {
  const int n_col = rule.n_collocation;
  const Eigen::Index expected = kind == OmegaKind::state ? n_col + 1 : n_col;
  if (values.rows() != expected) {
    throw std::invalid_argument("omega_norm: expected " + std::to_string(expected) + " rows, got " +
                                std::to_string(values.rows()));
  }
  double sum = 0.0;
  for (int i = 0; i < n_col; ++i) sum += rule.weights[i] * values.row(i).squaredNorm();
  if (kind == OmegaKind::state) sum += values.row(n_col).squaredNorm();
  return std::sqrt(sum);
}

double fit_decay_rate(std::span<const int> n_values, std::span<const double> errors) {
  if (n_values.size() != errors.size()) throw std::invalid_argument("fit_decay_rate: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (std::isfinite(errors[k]) && errors[k] > kErrorFloor) {
      xs.push_back(n_values[k]);
      ys.push_back(std::log10(errors[k]));
    }
  }
  if (static_cast<int>(xs.size()) < kMinFitPoints) return kNaN;
  const double count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= count;
  my /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  if (sxx == 0.0) return kNaN;
  return -sxy / sxx;
}

void finalize_report(ConvergenceReport& report) {
  std::vector<int> ns;
  std::vector<double> es, ec, el;
  report.floor_n.reset();
  for (const auto& row : report.rows) {
    ns.push_back(row.n);
    es.push_back(row.err_state);
    ec.push_back(row.err_control);
    el.push_back(row.err_costate);
    const bool floored = row.err_state <= kErrorFloor || row.err_control <= kErrorFloor || row.err_costate <= kErrorFloor;
    if (floored && !report.floor_n) report.floor_n = row.n;
  }
  FittedRates& r = report.fitted_rates;
  r.state = fit_decay_rate(ns, es);
  r.control = fit_decay_rate(ns, ec);
  r.costate = fit_decay_rate(ns, el);
  r.sufficient = std::isfinite(r.state) && std::isfinite(r.control) && std::isfinite(r.costate);
}

ConvergenceReport run_sweep(const ProblemSpec& spec, const AnalyticSolution& oracle, std::span<const int> n_list,
                            const SolverOptions& opts, bool warm_start) {
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 1) throw std::invalid_argument("run_sweep: N must be >= 1");
    if (k > 0 && n_list[k] <= n_list[k - 1]) throw std::invalid_argument("run_sweep: N list must be ascending");
  }
  ConvergenceReport report;
  report.problem_name = spec.name;
  std::optional<DiscreteSolution> previous;

  for (int n : n_list) {
    const DiffMatrices dm = build_diff_matrices(n);
    SolverOptions local = opts;
    if (warm_start && previous) {
      local.initial_guess = InitialGuess::warm_start;
      local.warm_start = previous;
    }
    ConvergenceRow row;
    row.n = n;
    try {
      const SolveResult result = newton_solve(spec, dm, local);
      row.iterations = result.solution.iterations;
      row.residual_norm = result.solution.residual_norm;
      row.converged = result.converged();
      if (row.converged) {
        const SupErrors e = sup_error(result.solution, oracle, spec, dm.rule);
        row.err_state = e.state;
        row.err_control = e.control;
        row.err_costate = e.costate;
        row.dense = dense_error(result.solution, oracle, spec, dm.rule);
        previous = result.solution;
      }
    } catch (const std::exception&) {
      row.converged = false;
      row.residual_norm = kNaN;
    }
    if (!row.converged) {
      row.err_state = row.err_control = row.err_costate = kNaN;
      row.dense = {kNaN, kNaN, kNaN};
    }
    report.rows.push_back(row);
  }
  finalize_report(report);
  return report;
}

}  // namespace gausscol
