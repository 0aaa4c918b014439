#include <cmath>
#include <vector>

#include "doctest.h"

#include "gausscol/convergence.hpp"
#include "test_support.hpp"

using namespace gausscol;

namespace {

// True if each error is below its predecessor until the first floored value.
bool decreasing_until_floor(const std::vector<double>& errs) {
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    if (errs[k] <= kErrorFloor) return true;
    if (!(errs[k + 1] < errs[k] || errs[k + 1] <= kErrorFloor)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sup_error of the sampled oracle is zero") {
  const BuiltinProblem p = builtin_example();
  const GaussRule rule = gauss_rule(9);
  const DiscreteSolution s = sample_oracle(p.spec, *p.oracle, rule);
  const SupErrors e = sup_error(s, *p.oracle, p.spec, rule);
  CHECK(e.state <= 1e-13);
  CHECK(e.control <= 1e-13);
  CHECK(e.costate <= 1e-13);
}

TEST_CASE("sup_error responds to a perturbation") {
  const BuiltinProblem p = builtin_example();
  const SolveResult r = newton_solve(p.spec, 8);
  REQUIRE(r.converged());
  const GaussRule rule = gauss_rule(8);
  const SupErrors before = sup_error(r.solution, *p.oracle, p.spec, rule);
  DiscreteSolution bumped = r.solution;
  bumped.X(4, 0) += 1e-3;
  const SupErrors after = sup_error(bumped, *p.oracle, p.spec, rule);
  CHECK(after.state >= 1e-3 - before.state);
  CHECK(after.control == before.control);
  CHECK(after.costate == before.costate);
}

TEST_CASE("builtin example errors at N = 20") {
  const BuiltinProblem p = builtin_example();
  const SolveResult r = newton_solve(p.spec, 20);
  REQUIRE(r.converged());
  const SupErrors e = sup_error(r.solution, *p.oracle, p.spec, gauss_rule(20));
  CHECK(e.state <= 1e-8);
  CHECK(e.control <= 1e-8);
  CHECK(e.costate <= 1e-8);
}

TEST_CASE("omega_norm examples") {
  const GaussRule rule = gauss_rule(6);
  CHECK(omega_norm(rule, Matrix::Zero(7, 2), OmegaKind::state) == 0.0);
  CHECK(omega_norm(rule, Matrix::Ones(7, 1), OmegaKind::state) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(omega_norm(rule, Matrix::Ones(6, 1), OmegaKind::control) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(omega_norm(rule, Matrix::Ones(6, 1), OmegaKind::state), std::invalid_argument);
  CHECK_THROWS_AS(omega_norm(rule, Matrix::Ones(7, 1), OmegaKind::control), std::invalid_argument);
}

TEST_CASE("omega_norm satisfies the norm axioms") {
  auto g = testing::rng(31);
  for (int n : {1, 4, 15}) {
    const GaussRule rule = gauss_rule(n);
    for (OmegaKind kind : {OmegaKind::state, OmegaKind::control}) {
      const Eigen::Index rows = kind == OmegaKind::state ? n + 1 : n;
      for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = testing::random_matrix(g, rows, 3), b = testing::random_matrix(g, rows, 3);
        const double na = omega_norm(rule, a, kind), nb = omega_norm(rule, b, kind);
        CHECK(na > 0.0);
        for (double c : {-4.0, 0.5, 8.0}) CHECK(omega_norm(rule, Matrix(c * a), kind) == std::abs(c) * na);
        const double c = testing::uniform(g, -3.0, 3.0);
        CHECK(omega_norm(rule, Matrix(c * a), kind) == doctest::Approx(std::abs(c) * na).epsilon(1e-14));
        CHECK(omega_norm(rule, Matrix(a + b), kind) <= na + nb + 1e-12);
      }
    }
  }
}

TEST_CASE("fit_decay_rate recovers a planted rate") {
  std::vector<int> ns;
  std::vector<double> errs;
  for (int n = 5; n <= 25; n += 2) {
    ns.push_back(n);
    errs.push_back(std::pow(10.0, -0.5 * n));
  }
  CHECK(std::abs(fit_decay_rate(ns, errs) - 0.5) <= 1e-12);

  const std::vector<int> two{5, 7};
  const std::vector<double> two_errs{1e-3, 1e-4};
  CHECK(std::isnan(fit_decay_rate(two, two_errs)));

  const std::vector<int> mixed{5, 7, 9, 11};
  const std::vector<double> mixed_errs{1e-3, NAN, 1e-5, 1e-13};
  CHECK(std::isnan(fit_decay_rate(mixed, mixed_errs)));
}

TEST_CASE("sweep on the builtin example") {
  const BuiltinProblem p = builtin_example();
  std::vector<int> ns;
  for (int n = 5; n <= 25; n += 2) ns.push_back(n);
  const ConvergenceReport r = run_sweep(p.spec, *p.oracle, ns);
  REQUIRE(r.rows.size() == ns.size());
  std::vector<double> es, ec, el;
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const ConvergenceRow& row = r.rows[k];
    CHECK(row.n == ns[k]);
    CHECK(row.converged);
    CHECK(row.err_state >= 0.0);
    CHECK(row.residual_norm <= 1e-10);
    es.push_back(row.err_state);
    ec.push_back(row.err_control);
    el.push_back(row.err_costate);
  }
  CHECK(decreasing_until_floor(es));
  CHECK(decreasing_until_floor(ec));
  CHECK(decreasing_until_floor(el));
  CHECK(r.fitted_rates.sufficient);
  CHECK(r.fitted_rates.state >= 0.45);
  CHECK(r.fitted_rates.state <= 0.75);
  CHECK(r.fitted_rates.control >= 0.45);
  CHECK(r.fitted_rates.control <= 0.75);
  CHECK(r.fitted_rates.costate >= 0.6);
  CHECK(r.fitted_rates.costate <= 1.0);
  REQUIRE(r.floor_n.has_value());
  CHECK(*r.floor_n > 5);
}

TEST_CASE("failed solves become NaN rows") {
  const BuiltinProblem p = builtin_example();
  SolverOptions opts;
  opts.max_iterations = 1;
  const std::vector<int> ns{5, 7, 9};
  const ConvergenceReport r = run_sweep(p.spec, *p.oracle, ns, opts);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK_FALSE(row.converged);
    CHECK(std::isnan(row.err_state));
    CHECK(std::isnan(row.err_control));
    CHECK(std::isnan(row.err_costate));
  }
  CHECK_FALSE(r.fitted_rates.sufficient);
  CHECK_FALSE(r.floor_n.has_value());
}

TEST_CASE("sweep requires ascending N") {
  const BuiltinProblem p = builtin_example();
  const std::vector<int> ns{9, 5};
  CHECK_THROWS_AS(run_sweep(p.spec, *p.oracle, ns), std::invalid_argument);
}

TEST_CASE("dense_error is close to the nodal error") {
  const BuiltinProblem p = builtin_example();
  const SolveResult r = newton_solve(p.spec, 15);
  REQUIRE(r.converged());
  const GaussRule rule = gauss_rule(15);
  const SupErrors nodal = sup_error(r.solution, *p.oracle, p.spec, rule);
  const SupErrors dense = dense_error(r.solution, *p.oracle, p.spec, rule);
  CHECK(dense.state >= 0.0);
  CHECK(dense.state <= 10.0 * nodal.state);
  CHECK(std::isnan(dense.control));
}
