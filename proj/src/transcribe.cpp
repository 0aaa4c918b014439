#include "gausscol/transcribe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gausscol {

EvaluationError::EvaluationError(int index, const std::string& what)
    : ProblemError("callback failed at node " + std::to_string(index) + ": " + what), index_(index) {}

namespace {

void check_dimensions(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& sol) {
  const int n_col = dm.size();
  const int n = spec.state_dim;
  const int m = spec.control_dim;
  if (sol.X.rows() != n_col + 2 || sol.X.cols() != n) throw std::invalid_argument("X must be (N+2) x n");
  if (sol.U.rows() != n_col || sol.U.cols() != m) throw std::invalid_argument("U must be N x m");
  if (sol.Lambda.rows() != n_col + 1 || sol.Lambda.cols() != n) throw std::invalid_argument("Lambda must be (N+1) x n");
}

template <class Fn>
auto at_node(int index, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const EvaluationError&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(index, e.what());
  }
}

double block_sup(const Matrix& rows) {
  double sup = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) sup = std::max(sup, rows.row(i).norm());
  return sup;
}

}  // namespace

// ---------------------------------------------------------------------------
// Packing

Eigen::Index system_size(int n_collocation, int state_dim, int control_dim) {
  return static_cast<Eigen::Index>(state_dim) * (2 * n_collocation + 2) +
         static_cast<Eigen::Index>(control_dim) * n_collocation;
}

Vector ResidualVector::pack() const {
  const Eigen::Index n_col = T1.rows();
  const Eigen::Index n = T1.cols();
  const Eigen::Index m = T5.cols();
  Vector out(n * (2 * n_col + 2) + m * n_col);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n_col; ++i, k += n) out.segment(k, n) = T1.row(i).transpose();
  out.segment(k, n) = T2;
  k += n;
  for (Eigen::Index i = 0; i < n_col; ++i, k += n) out.segment(k, n) = T3.row(i).transpose();
  out.segment(k, n) = T4;
  k += n;
  for (Eigen::Index i = 0; i < n_col; ++i, k += m) out.segment(k, m) = T5.row(i).transpose();
  return out;
}

ResidualVector ResidualVector::unpack(const Vector& packed, int n_collocation, int state_dim, int control_dim) {
  const Eigen::Index n_col = n_collocation;
  const Eigen::Index n = state_dim;
  const Eigen::Index m = control_dim;
  if (packed.size() != system_size(n_collocation, state_dim, control_dim)) {
    throw std::invalid_argument("ResidualVector::unpack: wrong packed length");
  }
  ResidualVector r;
  r.T1.resize(n_col, n);
  r.T3.resize(n_col, n);
  r.T5.resize(n_col, m);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n_col; ++i, k += n) r.T1.row(i) = packed.segment(k, n).transpose();
  r.T2 = packed.segment(k, n);
  k += n;
  for (Eigen::Index i = 0; i < n_col; ++i, k += n) r.T3.row(i) = packed.segment(k, n).transpose();
  r.T4 = packed.segment(k, n);
  k += n;
  for (Eigen::Index i = 0; i < n_col; ++i, k += m) r.T5.row(i) = packed.segment(k, m).transpose();
  return r;
}

std::array<double, 5> ResidualVector::block_norms() const {
  return {block_sup(T1), T2.norm(), block_sup(T3), T4.norm(), block_sup(T5)};
}

double ResidualVector::norm_inf() const {
  const auto b = block_norms();
  return *std::max_element(b.begin(), b.end());
}

Vector pack_unknowns(const DiscreteSolution& sol) {
  const Eigen::Index n_col = sol.U.rows();
  const Eigen::Index n = sol.X.cols();
  const Eigen::Index m = sol.U.cols();
  Vector theta(n * (2 * n_col + 2) + m * n_col);
  Eigen::Index k = 0;
  for (Eigen::Index j = 1; j <= n_col + 1; ++j, k += n) theta.segment(k, n) = sol.X.row(j).transpose();
  for (Eigen::Index i = 0; i < n_col; ++i, k += m) theta.segment(k, m) = sol.U.row(i).transpose();
  for (Eigen::Index j = 0; j <= n_col; ++j, k += n) theta.segment(k, n) = sol.Lambda.row(j).transpose();
  return theta;
}

DiscreteSolution unpack_unknowns(const Vector& theta, const Vector& x0, int n_collocation, int control_dim) {
  const Eigen::Index n_col = n_collocation;
  const Eigen::Index n = x0.size();
  const Eigen::Index m = control_dim;
  if (theta.size() != system_size(n_collocation, static_cast<int>(n), control_dim)) {
    throw std::invalid_argument("unpack_unknowns: wrong packed length");
  }
  DiscreteSolution sol;
  sol.X.resize(n_col + 2, n);
  sol.U.resize(n_col, m);
  sol.Lambda.resize(n_col + 1, n);
  sol.X.row(0) = x0.transpose();
  Eigen::Index k = 0;
  for (Eigen::Index j = 1; j <= n_col + 1; ++j, k += n) sol.X.row(j) = theta.segment(k, n).transpose();
  for (Eigen::Index i = 0; i < n_col; ++i, k += m) sol.U.row(i) = theta.segment(k, m).transpose();
  for (Eigen::Index j = 0; j <= n_col; ++j, k += n) sol.Lambda.row(j) = theta.segment(k, n).transpose();
  return sol;
}

// ---------------------------------------------------------------------------
// Residual and Jacobian

ResidualVector residual(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& sol) {
  check_dimensions(spec, dm, sol);
  const int n_col = dm.size();
  const int n = spec.state_dim;
  const double scale = spec.time_scale();

  ResidualVector r;
  r.T1.resize(n_col, n);
  r.T3.resize(n_col, n);
  r.T5.resize(n_col, spec.control_dim);
  Vector propagated = Vector::Zero(n);

  for (int i = 1; i <= n_col; ++i) {
    const Vector x = sol.X.row(i).transpose();
    const Vector u = sol.U.row(i - 1).transpose();
    const Vector l = sol.Lambda.row(i - 1).transpose();
    const Vector f = at_node(i, [&] {
      Vector v = spec.dynamics(x, u);
      if (v.size() != n) throw ProblemError("dynamics returned a vector of wrong length");
      return v;
    });
    const Matrix a = at_node(i, [&] { return spec.jac_x(x, u); });
    const Matrix b = at_node(i, [&] { return spec.jac_u(x, u); });

    r.T1.row(i - 1) = dm.D.row(i - 1) * sol.X.topRows(n_col + 1) - scale * f.transpose();
    propagated += dm.rule.omega(i) * scale * f;
    r.T3.row(i - 1) = dm.Ddag.row(i - 1) * sol.Lambda + scale * (a.transpose() * l).transpose();
    r.T5.row(i - 1) = scale * (b.transpose() * l).transpose();
  }
  r.T2 = sol.X.row(n_col + 1).transpose() - sol.X.row(0).transpose() - propagated;
  const Vector x_end = sol.X.row(n_col + 1).transpose();
  const Vector g = at_node(n_col + 1, [&] { return spec.grad_cost(x_end); });
  r.T4 = sol.Lambda.row(n_col).transpose() - g;
  return r;
}

Matrix jacobian(const ProblemSpec& spec, const DiffMatrices& dm, const DiscreteSolution& sol) {
  check_dimensions(spec, dm, sol);
  const int n_col = dm.size();
  const int n = spec.state_dim;
  const int m = spec.control_dim;
  const double scale = spec.time_scale();
  const Eigen::Index size = system_size(n_col, n, m);

  // Column offsets of the unknown blocks.
  auto col_x = [&](int j) -> Eigen::Index { return static_cast<Eigen::Index>(j - 1) * n; };
  auto col_u = [&](int i) -> Eigen::Index { return static_cast<Eigen::Index>(n) * (n_col + 1) + (i - 1) * m; };
  auto col_l = [&](int j) -> Eigen::Index {
    return static_cast<Eigen::Index>(n) * (n_col + 1) + static_cast<Eigen::Index>(m) * n_col + (j - 1) * n;
  };
  // Row offsets of the residual blocks.
  auto row_t1 = [&](int i) -> Eigen::Index { return static_cast<Eigen::Index>(i - 1) * n; };
  const Eigen::Index row_t2 = static_cast<Eigen::Index>(n) * n_col;
  auto row_t3 = [&](int i) -> Eigen::Index { return row_t2 + n + static_cast<Eigen::Index>(i - 1) * n; };
  const Eigen::Index row_t4 = 2 * row_t2 + n;
  auto row_t5 = [&](int i) -> Eigen::Index { return row_t4 + n + static_cast<Eigen::Index>(i - 1) * m; };

  const Matrix eye = Matrix::Identity(n, n);
  Matrix jac = Matrix::Zero(size, size);

  for (int i = 1; i <= n_col; ++i) {
    const Vector x = sol.X.row(i).transpose();
    const Vector u = sol.U.row(i - 1).transpose();
    const Vector l = sol.Lambda.row(i - 1).transpose();
    const PointEvaluation ev = at_node(i, [&] { return evaluate_point(spec, x, u, l); });
    const Matrix a = scale * ev.A;
    const Matrix b = scale * ev.B;
    const double w = dm.rule.omega(i);

    // T1_i: sum_{j=1}^N D_ij X_j - A_i X_i - B_i U_i
    for (int j = 1; j <= n_col; ++j) jac.block(row_t1(i), col_x(j), n, n) = dm.D(i - 1, j) * eye;
    jac.block(row_t1(i), col_x(i), n, n) -= a;
    jac.block(row_t1(i), col_u(i), n, m) = -b;

    // T2: X_{N+1} - sum_j omega_j (A_j X_j + B_j U_j)
    jac.block(row_t2, col_x(i), n, n) = -w * a;
    jac.block(row_t2, col_u(i), n, m) = -w * b;

    // T3_i: sum_{j=1}^{N+1} Ddag_ij Lambda_j + A_i^T Lambda_i + Q_i X_i + S_i U_i
    for (int j = 1; j <= n_col + 1; ++j) jac.block(row_t3(i), col_l(j), n, n) = dm.Ddag(i - 1, j - 1) * eye;
    jac.block(row_t3(i), col_l(i), n, n) += a.transpose();
    jac.block(row_t3(i), col_x(i), n, n) = scale * ev.Q;
    jac.block(row_t3(i), col_u(i), n, m) = scale * ev.S;

    // T5_i: S_i^T X_i + R_i U_i + B_i^T Lambda_i
    jac.block(row_t5(i), col_x(i), m, n) = scale * ev.S.transpose();
    jac.block(row_t5(i), col_u(i), m, m) = scale * ev.R;
    jac.block(row_t5(i), col_l(i), m, n) = b.transpose();
  }

  jac.block(row_t2, col_x(n_col + 1), n, n) = eye;

  // T4: Lambda_{N+1} - T X_{N+1}
  const Vector x_end = sol.X.row(n_col + 1).transpose();
  const Matrix hc = at_node(n_col + 1, [&] {
    Matrix h = spec.hess_cost(x_end);
    if (h.rows() != n || h.cols() != n) throw ProblemError("hess_cost has wrong shape");
    return h;
  });
  jac.block(row_t4, col_x(n_col + 1), n, n) = -hc;
  jac.block(row_t4, col_l(n_col + 1), n, n) = eye;
  return jac;
}

// ---------------------------------------------------------------------------
// Multipliers and propagation

Matrix kkt_transform(std::span<const double> weights, const Matrix& lambda_raw) {
  const auto n_col = static_cast<Eigen::Index>(weights.size());
  if (lambda_raw.rows() != n_col + 1) throw std::invalid_argument("kkt_transform: expected N+1 multiplier rows");
  Matrix out(lambda_raw.rows(), lambda_raw.cols());
  for (Eigen::Index i = 0; i < n_col; ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("kkt_transform: weights must be positive");
    out.row(i) = lambda_raw.row(i) / weights[i] + lambda_raw.row(n_col);
  }
  out.row(n_col) = lambda_raw.row(n_col);
  return out;
}

Matrix kkt_inverse_transform(std::span<const double> weights, const Matrix& costate) {
  const auto n_col = static_cast<Eigen::Index>(weights.size());
  if (costate.rows() != n_col + 1) throw std::invalid_argument("kkt_inverse_transform: expected N+1 costate rows");
  Matrix out(costate.rows(), costate.cols());
  for (Eigen::Index i = 0; i < n_col; ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("kkt_inverse_transform: weights must be positive");
    out.row(i) = weights[i] * (costate.row(i) - costate.row(n_col));
  }
  out.row(n_col) = costate.row(n_col);
  return out;
}

Vector terminal_state(std::span<const double> weights, const Matrix& X, const Matrix& U, const ProblemSpec& spec) {
  const auto n_col = static_cast<Eigen::Index>(weights.size());
  if (X.rows() < n_col + 1 || U.rows() != n_col || X.cols() != spec.state_dim || U.cols() != spec.control_dim) {
    throw std::invalid_argument("terminal_state: dimension mismatch");
  }
  Vector out = X.row(0).transpose();
  const double scale = spec.time_scale();
  for (Eigen::Index j = 1; j <= n_col; ++j) {
    const Vector x = X.row(j).transpose();
    const Vector u = U.row(j - 1).transpose();
    const Vector f = at_node(static_cast<int>(j), [&] { return spec.dynamics(x, u); });
    if (f.size() != spec.state_dim) throw ProblemError("dynamics returned a vector of wrong length");
    out += weights[j - 1] * scale * f;
  }
  return out;
}

DiscreteSolution sample_oracle(const ProblemSpec& spec, const AnalyticSolution& oracle, const GaussRule& rule) {
  const int n_col = rule.n_collocation;
  DiscreteSolution sol;
  sol.X.resize(n_col + 2, spec.state_dim);
  sol.U.resize(n_col, spec.control_dim);
  sol.Lambda.resize(n_col + 1, spec.state_dim);
  for (int i = 0; i <= n_col + 1; ++i) {
    const double t = map_time(spec, rule.nodes[i]);
    sol.X.row(i) = oracle.state(t).transpose();
    if (i >= 1 && i <= n_col) sol.U.row(i - 1) = oracle.control(t).transpose();
    if (i >= 1) sol.Lambda.row(i - 1) = oracle.costate(t).transpose();
  }
  sol.X.row(0) = spec.x0.transpose();
  return sol;
}

}  // namespace gausscol
