#include <cmath>

#include "doctest.h"

#include "gausscol/convergence.hpp"
#include "gausscol/solver.hpp"
#include "test_support.hpp"

using namespace gausscol;

TEST_CASE("hand-solvable drift problem") {
  const ProblemSpec spec = testing::drift_problem();
  for (InitialGuess guess : {InitialGuess::forward_backward, InitialGuess::constant}) {
    SolverOptions opts;
    opts.initial_guess = guess;
    const SolveResult r = newton_solve(spec, 5, opts);
    REQUIRE(r.converged());
    CHECK((r.solution.U.array()).abs().maxCoeff() <= 1e-10);
    CHECK((r.solution.X.array() - 1.0).abs().maxCoeff() <= 1e-10);
    CHECK((r.solution.Lambda.array() + 1.0).abs().maxCoeff() <= 1e-10);
    REQUIRE(r.control_end.available);
    CHECK(std::abs(r.control_end.u(0)) <= 1e-12);
  }
}

TEST_CASE("builtin example at N = 10") {
  const BuiltinProblem p = builtin_example();
  const SolveResult r = newton_solve(p.spec, 10);
  REQUIRE(r.converged());
  CHECK(r.solution.iterations <= 20);
  CHECK(r.solution.iterations == 3);
  CHECK(r.solution.residual_norm <= 1e-10);

  // Newton tail: r_{k+1} <= c r_k^2 with c <= 1e5.
  const auto& h = r.residual_history;
  REQUIRE(h.size() >= 2);
  const double prev = h[h.size() - 2], last = h.back();
  CHECK(last <= 1e5 * prev * prev);

  const DiffMatrices dm = build_diff_matrices(10);
  const auto blocks = residual(p.spec, dm, r.solution).block_norms();
  for (double b : blocks) CHECK(b <= 1e-10);
  CHECK((r.solution.Lambda.row(10) - p.spec.grad_cost(r.solution.X.row(11).transpose()).transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-10);

  REQUIRE(r.control_start.available);
  REQUIRE(r.control_end.available);
  CHECK(r.control_start.u(0) == doctest::Approx(0.5 * r.solution.X(0, 0)).epsilon(1e-12));
  CHECK(r.control_end.u(0) == doctest::Approx(0.5 * r.solution.X(11, 0)).epsilon(1e-12));
}

TEST_CASE("constant start on the builtin example does not reach the optimum") {
  const BuiltinProblem p = builtin_example();
  SolverOptions opts;
  opts.initial_guess = InitialGuess::constant;
  const SolveResult r = newton_solve(p.spec, 10, opts);
  const DiffMatrices dm = build_diff_matrices(10);
  const bool at_optimum = r.converged() && sup_error(r.solution, *p.oracle, p.spec, dm.rule).state < 1e-3;
  CHECK_FALSE(at_optimum);
}

TEST_CASE("oracle start at N = 25") {
  const BuiltinProblem p = builtin_example();
  SolverOptions opts;
  opts.initial_guess = InitialGuess::oracle;
  opts.oracle = p.oracle;
  opts.tolerance = 1e-6;
  const SolveResult r = newton_solve(p.spec, 25, opts);
  REQUIRE(r.converged());
  CHECK(r.solution.iterations <= 1);
}

TEST_CASE("solves are deterministic") {
  const BuiltinProblem p = builtin_example();
  const SolveResult a = newton_solve(p.spec, 12);
  const SolveResult b = newton_solve(p.spec, 12);
  CHECK(a.residual_history == b.residual_history);
  CHECK(a.solution.X == b.solution.X);
  CHECK(a.solution.U == b.solution.U);
  CHECK(a.solution.Lambda == b.solution.Lambda);
}

TEST_CASE("warm start needs no more iterations than a cold start") {
  const BuiltinProblem p = builtin_example();
  for (int n : {5, 8, 10}) {
    const SolveResult coarse = newton_solve(p.spec, n);
    REQUIRE(coarse.converged());
    const SolveResult cold = newton_solve(p.spec, n + 5);
    SolverOptions warm_opts;
    warm_opts.initial_guess = InitialGuess::warm_start;
    warm_opts.warm_start = coarse.solution;
    const SolveResult warm = newton_solve(p.spec, n + 5, warm_opts);
    REQUIRE(cold.converged());
    REQUIRE(warm.converged());
    CHECK(warm.solution.iterations <= cold.solution.iterations);
  }
}

TEST_CASE("iteration budget and singular Jacobian are reported") {
  const BuiltinProblem p = builtin_example();
  SolverOptions opts;
  opts.max_iterations = 1;
  const SolveResult r = newton_solve(p.spec, 10, opts);
  CHECK(r.status == SolveStatus::non_convergence);
  CHECK(r.solution.iterations == 1);
  CHECK(std::isfinite(r.solution.residual_norm));

  // grad_u H does not depend on u: the T5 rows have a zero control block.
  ProblemSpec flat = testing::scalar_problem([](const Vector& x, const Vector& u) { return Vector(x + u); },
                                             [](const Vector&, const Vector&) { return Matrix::Ones(1, 1).eval(); },
                                             [](const Vector&, const Vector&) { return Matrix::Ones(1, 1).eval(); });
  const SolveResult s = newton_solve(flat, 4);
  CHECK(s.status == SolveStatus::singular_jacobian);
}

TEST_CASE("endpoint_control") {
  const BuiltinProblem p = builtin_example();
  const Vector x{{0.8}}, l{{-1.3}}, seed{{0.1}};
  const EndpointControl c = endpoint_control(p.spec, x, l, seed);
  REQUIRE(c.available);
  CHECK(c.u(0) == doctest::Approx(0.4).epsilon(1e-12));

  const EndpointControl d = endpoint_control(testing::drift_problem(), Vector{{1.0}}, Vector{{-1.0}}, Vector{{0.3}});
  REQUIRE(d.available);
  CHECK(std::abs(d.u(0)) <= 1e-12);

  // H = lambda^T f with f = (u^2/2 - b u, u_1): grad_u H = u - b for lambda = (1, 0), R = I.
  ProblemSpec quad;
  quad.name = "quad";
  quad.state_dim = 2;
  quad.control_dim = 2;
  quad.x0 = Vector::Zero(2);
  const Vector b{{0.7, -1.1}};
  quad.dynamics = [b](const Vector&, const Vector& u) {
    return Vector{{0.5 * u.squaredNorm() - b.dot(u), u(0)}};
  };
  quad.jac_x = [](const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  quad.jac_u = [b](const Vector&, const Vector& u) {
    Matrix m = Matrix::Zero(2, 2);
    m.row(0) = (u - b).transpose();
    m(1, 0) = 1.0;
    return m;
  };
  quad.hess_xx = [](const Vector&, const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  quad.hess_xu = [](const Vector&, const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  quad.hess_uu = [](const Vector&, const Vector&, const Vector& l) { return Matrix(l(0) * Matrix::Identity(2, 2)); };
  quad.cost = [](const Vector& x) { return x(0); };
  quad.grad_cost = [](const Vector&) { return Vector{{1.0, 0.0}}; };
  quad.hess_cost = [](const Vector&) { return Matrix::Zero(2, 2).eval(); };
  const EndpointControl q = endpoint_control(quad, Vector::Zero(2), Vector{{1.0, 0.0}}, Vector::Zero(2));
  REQUIRE(q.available);
  CHECK(q.iterations == 1);
  CHECK((q.u - b).cwiseAbs().maxCoeff() <= 1e-15);

  const EndpointControl none = endpoint_control(quad, Vector::Zero(2), Vector{{0.0, 1.0}}, Vector::Zero(2));
  CHECK_FALSE(none.available);
}

TEST_CASE("interpolate") {
  const GaussRule rule = gauss_rule(6);
  Matrix state(7, 1), costate(7, 1), interior(6, 1);
  auto p = [](double t) { return t * t * t - 0.5 * t + 0.25; };
  for (int j = 0; j <= 6; ++j) state(j, 0) = p(rule.nodes[j]);
  for (int j = 1; j <= 7; ++j) costate(j - 1, 0) = p(rule.nodes[j]);
  for (int j = 1; j <= 6; ++j) interior(j - 1, 0) = p(rule.nodes[j]);

  for (int j = 0; j <= 6; ++j) CHECK(interpolate(rule, state, NodeSet::state, rule.nodes[j])(0) == state(j, 0));
  for (int j = 1; j <= 7; ++j)
    CHECK(interpolate(rule, costate, NodeSet::costate, rule.nodes[j])(0) == costate(j - 1, 0));

  for (int k = 0; k <= 40; ++k) {
    const double t = -1.0 + 2.0 * k / 40.0;
    CHECK(std::abs(interpolate(rule, state, NodeSet::state, t)(0) - p(t)) <= 1e-12);
    CHECK(std::abs(interpolate(rule, costate, NodeSet::costate, t)(0) - p(t)) <= 1e-12);
    CHECK(std::abs(interpolate(rule, interior, NodeSet::interior, t)(0) - p(t)) <= 1e-12);
  }
  CHECK_THROWS_AS(interpolate(rule, state, NodeSet::state, 1.01), std::domain_error);
  CHECK_THROWS_AS(interpolate(rule, interior, NodeSet::state, 0.0), std::invalid_argument);
}

TEST_CASE("interpolated state tracks the oracle between nodes") {
  const BuiltinProblem p = builtin_example();
  const int n = 15;
  const SolveResult r = newton_solve(p.spec, n);
  REQUIRE(r.converged());
  const GaussRule rule = gauss_rule(n);
  const double node_err = sup_error(r.solution, *p.oracle, p.spec, rule).state;
  const BarycentricInterpolant interp(rule, NodeSet::state);
  const Matrix nodal = r.solution.X.topRows(n + 1);
  double dense = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double t = p.spec.t0 + (p.spec.tf - p.spec.t0) * k / 49.0;
    const double tau = unmap_time(p.spec, t);
    dense = std::max(dense, std::abs(interp(nodal, tau)(0) - p.oracle->state(t)(0)));
  }
  CHECK(dense <= 10.0 * node_err);
}

TEST_CASE("second-order diagnostic is reported") {
  const SolveResult r = newton_solve(builtin_problem("lq-example").spec, 8);
  REQUIRE(r.converged());
  CHECK(std::isfinite(r.min_hessian_eigenvalue));
}
