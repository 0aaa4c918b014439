#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gausscol/convergence.hpp"
#include "gausscol/diffmat.hpp"
#include "gausscol/quadrature.hpp"
#include "gausscol/solver.hpp"

namespace gausscol {

/// 17 significant digits ("%.17g"), which round-trips any double.  NaN and
/// infinities print as nan, inf, -inf.
std::string format_double(double value);

/// All-numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table);
/// Throws std::runtime_error on ragged rows or non-numeric cells.
CsvTable read_csv(std::istream& in);

/// Columns i, tau, omega.  The endpoints tau_0 and tau_{N+1} carry weight 0.
CsvTable rule_table(const GaussRule& rule);
/// Columns N, p1_norm, p1_minus_one_plus_tauN, p2_norm, p2_argmax_row, flip_max_dev.
CsvTable certification_table(const CertificationReport& report);
/// Columns N, err_state, err_control, err_costate, iterations, residual.
CsvTable convergence_table(const ConvergenceReport& report);
/// One row per node i = 0..N+1: i, tau, t, x_*, u_*, lambda_* and, with an
/// oracle, err_x, err_u, err_lambda.  Endpoint controls come from the
/// solve result (NaN when unavailable); lambda at tau_0 is the costate
/// interpolant evaluated there.
CsvTable solution_table(const ProblemSpec& spec, const GaussRule& rule, const SolveResult& result,
                        const std::optional<AnalyticSolution>& oracle);

nlohmann::json rule_json(const GaussRule& rule);
nlohmann::json certification_json(const CertificationReport& report);
nlohmann::json convergence_json(const ConvergenceReport& report);
nlohmann::json solution_json(const ProblemSpec& spec, const GaussRule& rule, const SolveResult& result,
                             const std::optional<AnalyticSolution>& oracle);

}  // namespace gausscol
