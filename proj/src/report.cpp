#include "gausscol/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gausscol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_cell(const std::string& cell, std::size_t line) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (cell.empty() || end != begin + cell.size()) {
    throw std::runtime_error("read_csv: non-numeric cell '" + cell + "' on line " + std::to_string(line));
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json table_json(const CsvTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[table.header[c]] = number(row[c]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: missing header");
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw std::runtime_error("read_csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                               " cells, header has " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(parse_cell(cell, line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable rule_table(const GaussRule& rule) {
  CsvTable t;
  t.header = {"i", "tau", "omega"};
  const int n = rule.n_collocation;
  for (int i = 0; i <= n + 1; ++i) {
    const double w = (i >= 1 && i <= n) ? rule.omega(i) : 0.0;
    t.rows.push_back({static_cast<double>(i), rule.nodes[i], w});
  }
  return t;
}

CsvTable certification_table(const CertificationReport& report) {
  CsvTable t;
  t.header = {"N", "p1_norm", "p1_minus_one_plus_tauN", "p2_norm", "p2_argmax_row", "flip_max_dev"};
  for (const auto& r : report.rows) {
    t.rows.push_back({static_cast<double>(r.n), r.p1.invertible ? r.p1.norm : kNaN, r.p1_minus_one_plus_tau_n,
                      r.p2.invertible ? r.p2.max_row_norm : kNaN, static_cast<double>(r.p2.argmax_row),
                      r.flip_max_dev});
  }
  return t;
}

CsvTable convergence_table(const ConvergenceReport& report) {
  CsvTable t;
  t.header = {"N", "err_state", "err_control", "err_costate", "iterations", "residual"};
  for (const auto& r : report.rows) {
    t.rows.push_back({static_cast<double>(r.n), r.err_state, r.err_control, r.err_costate,
                      static_cast<double>(r.iterations), r.residual_norm});
  }
  return t;
}

CsvTable solution_table(const ProblemSpec& spec, const GaussRule& rule, const SolveResult& result,
                        const std::optional<AnalyticSolution>& oracle) {
  const int n_col = rule.n_collocation;
  const int n = spec.state_dim;
  const int m = spec.control_dim;
  const DiscreteSolution& sol = result.solution;
  CsvTable t;
  t.header = {"i", "tau", "t"};
  for (int k = 1; k <= n; ++k) t.header.push_back("x_" + std::to_string(k));
  for (int k = 1; k <= m; ++k) t.header.push_back("u_" + std::to_string(k));
  for (int k = 1; k <= n; ++k) t.header.push_back("lambda_" + std::to_string(k));
  if (oracle) {
    t.header.insert(t.header.end(), {"err_x", "err_u", "err_lambda"});
  }

  const BarycentricInterpolant costate(rule, NodeSet::costate);
  auto endpoint = [&](const EndpointControl& ec) -> Vector {
    return ec.available ? ec.u : Vector::Constant(m, kNaN);
  };

  for (int i = 0; i <= n_col + 1; ++i) {
    const double tau = rule.nodes[i];
    const double time = map_time(spec, tau);
    const Vector x = sol.X.row(i).transpose();
    Vector u;
    if (i == 0) {
      u = endpoint(result.control_start);
    } else if (i == n_col + 1) {
      u = endpoint(result.control_end);
    } else {
      u = sol.U.row(i - 1).transpose();
    }
    const Vector l = i == 0 ? costate(sol.Lambda, -1.0) : Vector(sol.Lambda.row(i - 1).transpose());

    std::vector<double> row{static_cast<double>(i), tau, time};
    for (int k = 0; k < n; ++k) row.push_back(x[k]);
    for (int k = 0; k < m; ++k) row.push_back(u[k]);
    for (int k = 0; k < n; ++k) row.push_back(l[k]);
    if (oracle) {
      row.push_back((x - oracle->state(time)).norm());
      row.push_back((u - oracle->control(time)).norm());
      row.push_back((l - oracle->costate(time)).norm());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

nlohmann::json rule_json(const GaussRule& rule) {
  return {{"N", rule.n_collocation}, {"nodes", rule.nodes}, {"weights", rule.weights}};
}

nlohmann::json certification_json(const CertificationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"N", r.n},
                    {"tau_N", r.tau_n},
                    {"p1_invertible", r.p1.invertible},
                    {"p1_norm", number(r.p1.norm)},
                    {"p1_minus_one_plus_tauN", number(r.p1_minus_one_plus_tau_n)},
                    {"p2_invertible", r.p2.invertible},
                    {"p2_norm", number(r.p2.max_row_norm)},
                    {"p2_argmax_row", r.p2.argmax_row},
                    {"flip_max_dev", number(r.flip_max_dev)},
                    {"p1_flagged", r.p1_flagged},
                    {"p2_flagged", r.p2_flagged}});
  }
  return {{"rows", rows}, {"flagged", report.flagged()}, {"p1_nondecreasing", report.p1_nondecreasing}};
}

nlohmann::json convergence_json(const ConvergenceReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"N", r.n},
                    {"err_state", number(r.err_state)},
                    {"err_control", number(r.err_control)},
                    {"err_costate", number(r.err_costate)},
                    {"iterations", r.iterations},
                    {"residual", number(r.residual_norm)},
                    {"converged", r.converged},
                    {"dense_err_state", number(r.dense.state)},
                    {"dense_err_costate", number(r.dense.costate)}});
  }
  const auto& f = report.fitted_rates;
  nlohmann::json out = {{"problem", report.problem_name},
                        {"rows", rows},
                        {"rates",
                         {{"state", number(f.state)},
                          {"control", number(f.control)},
                          {"costate", number(f.costate)},
                          {"sufficient", f.sufficient}}}};
  out["floor_N"] = report.floor_n ? nlohmann::json(*report.floor_n) : nlohmann::json(nullptr);
  return out;
}

nlohmann::json solution_json(const ProblemSpec& spec, const GaussRule& rule, const SolveResult& result,
                             const std::optional<AnalyticSolution>& oracle) {
  return {{"problem", spec.name},
          {"N", rule.n_collocation},
          {"status", to_string(result.status)},
          {"message", result.message},
          {"iterations", result.solution.iterations},
          {"residual", number(result.solution.residual_norm)},
          {"residual_history", result.residual_history},
          {"min_hessian_eigenvalue", number(result.min_hessian_eigenvalue)},
          {"nodes", table_json(solution_table(spec, rule, result, oracle))}};
}

}  // namespace gausscol
