#include <cmath>

#include "doctest.h"

#include "gausscol/transcribe.hpp"
#include "test_support.hpp"

using namespace gausscol;

namespace {

ProblemSpec affine_problem() {
  ProblemSpec p;
  p.name = "affine";
  p.state_dim = 2;
  p.control_dim = 1;
  p.t0 = 0.0;
  p.tf = 3.0;
  p.x0 = Vector{{1.0, -1.0}};
  const Matrix a{{0.0, 1.0}, {-2.0, -0.3}};
  const Matrix b{{0.0}, {1.0}};
  p.dynamics = [a, b](const Vector& x, const Vector& u) { return Vector(a * x + b * u + Vector{{0.1, 0.0}}); };
  p.jac_x = [a](const Vector&, const Vector&) { return a; };
  p.jac_u = [b](const Vector&, const Vector&) { return b; };
  p.hess_xx = [](const Vector&, const Vector&, const Vector&) { return Matrix::Zero(2, 2).eval(); };
  p.hess_xu = [](const Vector&, const Vector&, const Vector&) { return Matrix::Zero(2, 1).eval(); };
  p.hess_uu = [](const Vector&, const Vector&, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  p.cost = [](const Vector& x) { return x(0) * x(0) + 0.5 * x(0) * x(1) + 2.0 * x(1) * x(1); };
  p.grad_cost = [](const Vector& x) { return Vector{{2.0 * x(0) + 0.5 * x(1), 0.5 * x(0) + 4.0 * x(1)}}; };
  p.hess_cost = [](const Vector&) { return Matrix{{2.0, 0.5}, {0.5, 4.0}}; };
  return p;
}

// x' = u on [-1, 1] with x = t^2, u = 2t.
ProblemSpec integrator() {
  return testing::scalar_problem([](const Vector&, const Vector& u) { return u; },
                                 [](const Vector&, const Vector&) { return Matrix::Zero(1, 1).eval(); },
                                 [](const Vector&, const Vector&) { return Matrix::Ones(1, 1).eval(); });
}

}  // namespace

TEST_CASE("system size and packing bijection") {
  CHECK(system_size(10, 2, 3) == 2 * 22 + 30);
  auto g = testing::rng(3);
  const ProblemSpec spec = testing::coupled_problem();
  for (int n : {1, 4, 9}) {
    const Vector theta = testing::random_matrix(g, system_size(n, 2, 1), 1);
    const DiscreteSolution sol = unpack_unknowns(theta, spec.x0, n, 1);
    CHECK(sol.X.rows() == n + 2);
    CHECK(sol.U.rows() == n);
    CHECK(sol.Lambda.rows() == n + 1);
    CHECK(sol.X.row(0) == spec.x0.transpose());
    CHECK(pack_unknowns(sol) == theta);

    const Vector r = testing::random_matrix(g, system_size(n, 2, 1), 1);
    CHECK(ResidualVector::unpack(r, n, 2, 1).pack() == r);
  }
}

TEST_CASE("residual blocks at the sampled oracle") {
  const BuiltinProblem p = builtin_example();
  const DiffMatrices dm = build_diff_matrices(12);
  const DiscreteSolution s = sample_oracle(p.spec, *p.oracle, dm.rule);
  CHECK(s.X(0, 0) == p.spec.x0(0));
  const ResidualVector r = residual(p.spec, dm, s);
  CHECK(r.T4.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.T5.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("T1 vanishes when the state is a polynomial of degree <= N") {
  const ProblemSpec spec = integrator();
  for (int n : {2, 3, 7}) {
    const DiffMatrices dm = build_diff_matrices(n);
    DiscreteSolution s;
    s.X.resize(n + 2, 1);
    for (int i = 0; i <= n + 1; ++i) s.X(i, 0) = dm.rule.nodes[i] * dm.rule.nodes[i];
    s.U.resize(n, 1);
    for (int i = 1; i <= n; ++i) s.U(i - 1, 0) = 2.0 * dm.rule.tau(i);
    s.Lambda = Matrix::Constant(n + 1, 1, -1.0);
    const ResidualVector r = residual(spec, dm, s);
    CHECK(r.T1.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.T2.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("norm_inf is the sup of per-node Euclidean norms") {
  ResidualVector r;
  r.T1 = Matrix{{3.0, 4.0}, {0.0, 1.0}};
  r.T2 = Vector{{1.0, 1.0}};
  r.T3 = Matrix{{0.0, 0.0}, {0.0, 2.0}};
  r.T4 = Vector{{-6.0, 0.0}};
  r.T5 = Matrix{{1.0}, {-2.0}};
  CHECK(r.norm_inf() == 6.0);
  const auto b = r.block_norms();
  CHECK(b[0] == 5.0);
  CHECK(b[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(b[2] == 2.0);
  CHECK(b[3] == 6.0);
  CHECK(b[4] == 2.0);
}

TEST_CASE("jacobian matches central differences") {
  auto g = testing::rng(11);
  const ProblemSpec problems[] = {builtin_example().spec, builtin_problem("lq-example").spec,
                                  testing::coupled_problem()};
  for (const ProblemSpec& spec : problems) {
    for (int n : {3, 5, 8}) {
      const DiffMatrices dm = build_diff_matrices(n);
      for (int trial = 0; trial < 5; ++trial) {
        const DiscreteSolution s = testing::random_solution(g, spec, n);
        INFO(spec.name << " N=" << n);
        CHECK(testing::max_relative_deviation(jacobian(spec, dm, s), testing::fd_jacobian(spec, dm, s)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("jacobian is constant for affine dynamics with quadratic cost") {
  auto g = testing::rng(12);
  const ProblemSpec spec = affine_problem();
  const DiffMatrices dm = build_diff_matrices(6);
  const Matrix j1 = jacobian(spec, dm, testing::random_solution(g, spec, 6, -5.0, 5.0));
  const Matrix j2 = jacobian(spec, dm, testing::random_solution(g, spec, 6, -5.0, 5.0));
  CHECK((j1 - j2).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("jacobian block structure") {
  auto g = testing::rng(13);
  const ProblemSpec spec = testing::coupled_problem();
  const int n = 3, dim = 2;
  const DiffMatrices dm = build_diff_matrices(n);
  const DiscreteSolution s = testing::random_solution(g, spec, n);
  const Matrix jac = jacobian(spec, dm, s);

  // d T4 / d Lambda_{N+1}: rows after T1, T2, T3; columns of the last Lambda.
  const Eigen::Index t4_row = dim * (2 * n + 1);
  const Eigen::Index lambda_end = jac.cols() - dim;
  CHECK(jac.block(t4_row, lambda_end, dim, dim) == Matrix::Identity(dim, dim));

  // d T1 / d (X_1..X_N) assembled by hand: kron(D_{1:N}, I) - blockdiag(s A_i).
  const double scale = spec.time_scale();
  Matrix expected = Matrix::Zero(n * dim, n * dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < dim; ++k) expected(i * dim + k, j * dim + k) = dm.D(i, j + 1);
    const double x1 = s.X(i + 1, 0), x2 = s.X(i + 1, 1);
    const Matrix a{{0.0, 1.0}, {-1.0 + x2, x1}};
    expected.block(i * dim, i * dim, dim, dim) -= scale * a;
  }
  CHECK((jac.topLeftCorner(n * dim, n * dim) - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("residual at the oracle decays with N") {
  const BuiltinProblem p = builtin_example();
  auto at = [&](int n) {
    const DiffMatrices dm = build_diff_matrices(n);
    return residual(p.spec, dm, sample_oracle(p.spec, *p.oracle, dm.rule)).norm_inf();
  };
  const double r5 = at(5), r20 = at(20);
  CHECK(r5 >= 1e3 * r20);
}

TEST_CASE("terminal_state") {
  auto zero = testing::scalar_problem([](const Vector&, const Vector&) { return Vector::Zero(1).eval(); },
                                      [](const Vector&, const Vector&) { return Matrix::Zero(1, 1).eval(); },
                                      [](const Vector&, const Vector&) { return Matrix::Zero(1, 1).eval(); });
  auto one = zero;
  one.dynamics = [](const Vector&, const Vector&) { return Vector::Ones(1).eval(); };
  const GaussRule rule = gauss_rule(7);
  const Matrix X = Matrix::Constant(9, 1, 1.0), U = Matrix::Zero(7, 1);
  CHECK(terminal_state(rule.weights, X, U, zero)(0) == 1.0);
  CHECK(terminal_state(rule.weights, X, U, one)(0) == doctest::Approx(3.0).epsilon(1e-14));

  const BuiltinProblem p = builtin_example();
  const DiffMatrices dm = build_diff_matrices(20);
  const DiscreteSolution s = sample_oracle(p.spec, *p.oracle, dm.rule);
  const double x_end = 4.0 / (1.0 + 3.0 * std::exp(5.0));
  CHECK(std::abs(terminal_state(dm.rule.weights, s.X, s.U, p.spec)(0) - x_end) <= 1e-8);
  CHECK(x_end == doctest::Approx(8.9638e-3).epsilon(1e-4));

  CHECK_THROWS(terminal_state(rule.weights, X, Matrix::Zero(6, 1), zero));
}

TEST_CASE("kkt transform") {
  const GaussRule rule = gauss_rule(10);
  CHECK(kkt_transform(rule.weights, Matrix::Zero(11, 2)).cwiseAbs().maxCoeff() == 0.0);

  auto g = testing::rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix raw = testing::random_matrix(g, 11, 2);
    const Matrix lam = kkt_transform(rule.weights, raw);
    CHECK(lam.row(10) == raw.row(10));
    for (int i = 1; i <= 10; ++i)
      CHECK((lam.row(i - 1) - (raw.row(i - 1) / rule.omega(i) + raw.row(10))).cwiseAbs().maxCoeff() == 0.0);
    const Matrix back = kkt_inverse_transform(rule.weights, lam);
    CHECK((back - raw).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((kkt_transform(rule.weights, back) - lam).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("callback failures carry the node index") {
  ProblemSpec spec = testing::coupled_problem();
  spec.dynamics = [](const Vector& x, const Vector&) -> Vector {
    if (x(0) > 5.0) throw std::runtime_error("out of range");
    return Vector::Zero(2);
  };
  const DiffMatrices dm = build_diff_matrices(4);
  auto g = testing::rng(15);
  DiscreteSolution s = testing::random_solution(g, spec, 4);
  s.X(3, 0) = 6.0;
  try {
    residual(spec, dm, s);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.index() == 3);
  }
}
