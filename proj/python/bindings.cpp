#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gausscol/convergence.hpp"
#include "gausscol/diffmat.hpp"
#include "gausscol/quadrature.hpp"
#include "gausscol/solver.hpp"

namespace py = pybind11;
using namespace gausscol;

namespace {

InitialGuess parse_guess(const std::string& name) {
  if (name == "forward-backward") return InitialGuess::forward_backward;
  if (name == "constant") return InitialGuess::constant;
  if (name == "oracle") return InitialGuess::oracle;
  throw py::value_error("initial_guess must be 'forward-backward', 'constant' or 'oracle'");
}

SolverOptions make_options(const BuiltinProblem& p, double tolerance, int max_iterations, const std::string& guess) {
  if (!(tolerance > 0.0)) throw py::value_error("tolerance must be positive");
  if (max_iterations < 1) throw py::value_error("max_iterations must be >= 1");
  SolverOptions o;
  o.tolerance = tolerance;
  o.max_iterations = max_iterations;
  o.initial_guess = parse_guess(guess);
  if (o.initial_guess == InitialGuess::oracle) {
    if (!p.oracle) throw py::value_error("problem has no analytic solution");
    o.oracle = p.oracle;
  }
  return o;
}

py::dict solve(const std::string& problem, int n, double tolerance, int max_iterations, const std::string& guess) {
  const BuiltinProblem p = builtin_problem(problem);
  const SolverOptions opts = make_options(p, tolerance, max_iterations, guess);
  const DiffMatrices dm = build_diff_matrices(n);
  SolveResult r;
  {
    py::gil_scoped_release release;
    r = newton_solve(p.spec, dm, opts);
  }
  py::dict out;
  out["status"] = to_string(r.status);
  out["converged"] = r.converged();
  out["message"] = r.message;
  out["iterations"] = r.solution.iterations;
  out["residual"] = r.solution.residual_norm;
  out["residual_history"] = r.residual_history;
  out["X"] = r.solution.X;
  out["U"] = r.solution.U;
  out["Lambda"] = r.solution.Lambda;
  out["tau"] = dm.rule.nodes;
  out["control_start"] = r.control_start.available ? py::cast(r.control_start.u) : py::none();
  out["control_end"] = r.control_end.available ? py::cast(r.control_end.u) : py::none();
  out["min_hessian_eigenvalue"] = r.min_hessian_eigenvalue;
  if (p.oracle && r.converged()) {
    const SupErrors e = sup_error(r.solution, *p.oracle, p.spec, dm.rule);
    out["errors"] = py::dict(py::arg("state") = e.state, py::arg("control") = e.control, py::arg("costate") = e.costate);
  }
  return out;
}

py::dict sweep(const std::string& problem, const std::vector<int>& ns, double tolerance, int max_iterations,
               bool warm_start) {
  const BuiltinProblem p = builtin_problem(problem);
  if (!p.oracle) throw py::value_error("problem has no analytic solution");
  const SolverOptions opts = make_options(p, tolerance, max_iterations, "forward-backward");
  ConvergenceReport rep;
  {
    py::gil_scoped_release release;
    rep = run_sweep(p.spec, *p.oracle, ns, opts, warm_start);
  }
  py::list rows;
  for (const auto& r : rep.rows) {
    rows.append(py::dict(py::arg("N") = r.n, py::arg("err_state") = r.err_state,
                         py::arg("err_control") = r.err_control, py::arg("err_costate") = r.err_costate,
                         py::arg("iterations") = r.iterations, py::arg("residual") = r.residual_norm,
                         py::arg("converged") = r.converged));
  }
  const auto& f = rep.fitted_rates;
  py::dict out;
  out["problem"] = rep.problem_name;
  out["rows"] = rows;
  out["rates"] = py::dict(py::arg("state") = f.state, py::arg("control") = f.control,
                          py::arg("costate") = f.costate, py::arg("sufficient") = f.sufficient);
  out["floor_N"] = rep.floor_n ? py::cast(*rep.floor_n) : py::none();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Legendre-Gauss collocation for Mayer-form optimal control";

  py::register_exception<ProblemError>(m, "ProblemError", PyExc_RuntimeError);

  m.def("legendre_eval", &legendre_eval, py::arg("degree"), py::arg("t"));
  m.def(
      "gauss_rule",
      [](int n) {
        if (n < 1) throw py::value_error("n must be >= 1");
        const GaussRule r = gauss_rule(n);
        return py::make_tuple(r.nodes, r.weights);
      },
      py::arg("n"), "Return (nodes, weights); nodes include the endpoints -1 and +1.");
  m.def(
      "diff_matrices",
      [](int n) {
        if (n < 1) throw py::value_error("n must be >= 1");
        const DiffMatrices dm = build_diff_matrices(n);
        return py::make_tuple(dm.D, dm.Ddag);
      },
      py::arg("n"), "Return (D, Ddag), each N x (N+1).");
  m.def(
      "check_p1",
      [](int n) {
        if (n < 1) throw py::value_error("n must be >= 1");
        return check_P1(n).norm;
      },
      py::arg("n"));
  m.def(
      "check_p2",
      [](int n) {
        if (n < 1) throw py::value_error("n must be >= 1");
        const P2Check c = check_P2(n);
        return py::make_tuple(c.max_row_norm, c.argmax_row);
      },
      py::arg("n"));
  m.def(
      "flip_deviation", [](int n) { return flip_identity_deviation(build_diff_matrices(n)); }, py::arg("n"));
  m.def("builtin_names", &builtin_names);
  m.def("solve", &solve, py::arg("problem"), py::arg("n") = 10, py::arg("tolerance") = 1e-10,
        py::arg("max_iterations") = 50, py::arg("initial_guess") = "forward-backward");
  m.def("sweep", &sweep, py::arg("problem"), py::arg("ns"), py::arg("tolerance") = 1e-10,
        py::arg("max_iterations") = 50, py::arg("warm_start") = true);
}
