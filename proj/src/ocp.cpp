#include "gausscol/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace gausscol {

namespace {

constexpr double kFdStep = 1e-6;
constexpr double kNestedFdStep = 1e-4;
constexpr double kSymmetryTolerance = 1e-10;

using VectorMap = std::function<Vector(const Vector&)>;

double fd_step(double rel, double value) { return rel * (1.0 + std::abs(value)); }

/// Column k = (g(p + h e_k) - g(p - h e_k)) / 2h.
Matrix central_jacobian(const VectorMap& g, const Vector& p, double rel) {
  Matrix jac;
  Vector probe = p;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = fd_step(rel, p[k]);
    probe[k] = p[k] + h;
    const Vector plus = g(probe);
    probe[k] = p[k] - h;
    const Vector minus = g(probe);
    probe[k] = p[k];
    if (k == 0) jac.resize(plus.size(), p.size());
    jac.col(k) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

Vector central_gradient(const CostFn& c, const Vector& p, double rel) {
  Vector grad(p.size());
  Vector probe = p;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = fd_step(rel, p[k]);
    probe[k] = p[k] + h;
    const double plus = c(probe);
    probe[k] = p[k] - h;
    const double minus = c(probe);
    probe[k] = p[k];
    grad[k] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ProblemError(std::string(what) + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void check_symmetric(const Matrix& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw ProblemError(std::string(what) + " is not symmetric");
  }
}

double worst_deviation(const Matrix& analytic, const Matrix& fd) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
    for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
      const double a = analytic(i, j);
      worst = std::max(worst, std::abs(a - fd(i, j)) / std::max(1.0, std::abs(a)));
    }
  }
  return worst;
}

}  // namespace

void validate(const ProblemSpec& spec) {
  if (spec.state_dim < 1) throw ProblemError("state_dim must be positive");
  if (spec.control_dim < 1) throw ProblemError("control_dim must be positive");
  if (!(spec.t0 < spec.tf)) throw ProblemError("horizon requires t0 < tf");
  if (spec.x0.size() != spec.state_dim) throw ProblemError("x0 length does not match state_dim");
  if (!spec.dynamics || !spec.jac_x || !spec.jac_u || !spec.hess_xx || !spec.hess_xu || !spec.hess_uu) {
    throw ProblemError("problem '" + spec.name + "' is missing a dynamics or Hamiltonian callback");
  }
  if (!spec.cost || !spec.grad_cost || !spec.hess_cost) {
    throw ProblemError("problem '" + spec.name + "' is missing a cost callback");
  }
}

ProblemSpec with_finite_differences(ProblemSpec spec) {
  if (!spec.dynamics) throw ProblemError("with_finite_differences: dynamics callback is required");
  if (!spec.cost) throw ProblemError("with_finite_differences: cost callback is required");
  bool filled = false;
  const DynamicsFn f = spec.dynamics;

  const bool jac_x_fd = !spec.jac_x;
  const bool jac_u_fd = !spec.jac_u;
  if (jac_x_fd) {
    spec.jac_x = [f](const Vector& x, const Vector& u) {
      return central_jacobian([&](const Vector& p) { return f(p, u); }, x, kFdStep);
    };
    filled = true;
  }
  if (jac_u_fd) {
    spec.jac_u = [f](const Vector& x, const Vector& u) {
      return central_jacobian([&](const Vector& p) { return f(x, p); }, u, kFdStep);
    };
    filled = true;
  }

  const JacobianFn jx = spec.jac_x;
  const JacobianFn ju = spec.jac_u;
  const double outer_x = jac_x_fd ? kNestedFdStep : kFdStep;
  const double outer_u = jac_u_fd ? kNestedFdStep : kFdStep;
  if (!spec.hess_xx) {
    spec.hess_xx = [jx, outer_x](const Vector& x, const Vector& u, const Vector& l) {
      const Matrix q = central_jacobian([&](const Vector& p) -> Vector { return jx(p, u).transpose() * l; }, x, outer_x);
      return symmetrized(q);
    };
    filled = true;
  }
  if (!spec.hess_xu) {
    spec.hess_xu = [jx, outer_x](const Vector& x, const Vector& u, const Vector& l) {
      return central_jacobian([&](const Vector& p) -> Vector { return jx(x, p).transpose() * l; }, u, outer_x);
    };
    filled = true;
  }
  if (!spec.hess_uu) {
    spec.hess_uu = [ju, outer_u](const Vector& x, const Vector& u, const Vector& l) {
      const Matrix r = central_jacobian([&](const Vector& p) -> Vector { return ju(x, p).transpose() * l; }, u, outer_u);
      return symmetrized(r);
    };
    filled = true;
  }

  const CostFn c = spec.cost;
  const bool grad_fd = !spec.grad_cost;
  if (grad_fd) {
    spec.grad_cost = [c](const Vector& x) { return central_gradient(c, x, kFdStep); };
    filled = true;
  }
  if (!spec.hess_cost) {
    const CostGradientFn g = spec.grad_cost;
    const double outer = grad_fd ? kNestedFdStep : kFdStep;
    spec.hess_cost = [g, outer](const Vector& x) { return symmetrized(central_jacobian(g, x, outer)); };
    filled = true;
  }

  if (filled) spec.derivative_mode = DerivativeMode::finite_difference;
  return spec;
}

PointEvaluation evaluate_point(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda) {
  const int n = spec.state_dim;
  const int m = spec.control_dim;
  PointEvaluation ev;
  ev.f = spec.dynamics(x, u);
  if (ev.f.size() != n) throw ProblemError("dynamics returned a vector of wrong length");
  ev.A = spec.jac_x(x, u);
  check_shape(ev.A, n, n, "jac_x");
  ev.B = spec.jac_u(x, u);
  check_shape(ev.B, n, m, "jac_u");
  ev.Q = spec.hess_xx(x, u, lambda);
  check_shape(ev.Q, n, n, "hess_xx");
  ev.S = spec.hess_xu(x, u, lambda);
  check_shape(ev.S, n, m, "hess_xu");
  ev.R = spec.hess_uu(x, u, lambda);
  check_shape(ev.R, m, m, "hess_uu");
  if (spec.derivative_mode == DerivativeMode::analytic) {
    check_symmetric(ev.Q, "hess_xx");
    check_symmetric(ev.R, "hess_uu");
  }
  return ev;
}

Vector grad_x_hamiltonian(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda) {
  return spec.jac_x(x, u).transpose() * lambda;
}

Vector grad_u_hamiltonian(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda) {
  return spec.jac_u(x, u).transpose() * lambda;
}

double map_time(const ProblemSpec& spec, double tau) {
  if (!(tau >= -1.0 && tau <= 1.0)) throw std::domain_error("map_time: tau outside [-1, 1]");
  return spec.t0 + (tau + 1.0) * spec.time_scale();
}

double unmap_time(const ProblemSpec& spec, double t) { return (t - spec.t0) / spec.time_scale() - 1.0; }

double fd_derivative_check(const ProblemSpec& spec, const Vector& x, const Vector& u, const Vector& lambda) {
  validate(spec);
  const PointEvaluation ev = evaluate_point(spec, x, u, lambda);
  double worst = 0.0;

  worst = std::max(worst, worst_deviation(ev.A, central_jacobian([&](const Vector& p) { return spec.dynamics(p, u); }, x, kFdStep)));
  worst = std::max(worst, worst_deviation(ev.B, central_jacobian([&](const Vector& p) { return spec.dynamics(x, p); }, u, kFdStep)));

  auto hx_of_x = [&](const Vector& p) -> Vector { return spec.jac_x(p, u).transpose() * lambda; };
  auto hx_of_u = [&](const Vector& p) -> Vector { return spec.jac_x(x, p).transpose() * lambda; };
  auto hu_of_u = [&](const Vector& p) -> Vector { return spec.jac_u(x, p).transpose() * lambda; };
  worst = std::max(worst, worst_deviation(ev.Q, central_jacobian(hx_of_x, x, kFdStep)));
  worst = std::max(worst, worst_deviation(ev.S, central_jacobian(hx_of_u, u, kFdStep)));
  worst = std::max(worst, worst_deviation(ev.R, central_jacobian(hu_of_u, u, kFdStep)));

  const Vector g = spec.grad_cost(x);
  worst = std::max(worst, worst_deviation(g, central_gradient(spec.cost, x, kFdStep)));
  worst = std::max(worst, worst_deviation(spec.hess_cost(x), central_jacobian(spec.grad_cost, x, kFdStep)));
  return worst;
}

// ---------------------------------------------------------------------------
// Builtin problems

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

BuiltinProblem make_exponential_example() {
  BuiltinProblem p;
  p.description = "min -x(2), x' = 2.5(-x + x u - u^2), x(0) = 1, t in [0, 2]";
  ProblemSpec& s = p.spec;
  s.name = "hager-example";
  s.state_dim = 1;
  s.control_dim = 1;
  s.t0 = 0.0;
  s.tf = 2.0;
  s.x0 = scalar(1.0);
  s.dynamics = [](const Vector& x, const Vector& u) { return scalar(2.5 * (-x[0] + x[0] * u[0] - u[0] * u[0])); };
  s.jac_x = [](const Vector&, const Vector& u) { return scalar_matrix(2.5 * (u[0] - 1.0)); };
  s.jac_u = [](const Vector& x, const Vector& u) { return scalar_matrix(2.5 * (x[0] - 2.0 * u[0])); };
  s.hess_xx = [](const Vector&, const Vector&, const Vector&) { return scalar_matrix(0.0); };
  s.hess_xu = [](const Vector&, const Vector&, const Vector& l) { return scalar_matrix(2.5 * l[0]); };
  s.hess_uu = [](const Vector&, const Vector&, const Vector& l) { return scalar_matrix(-5.0 * l[0]); };
  s.cost = [](const Vector& x) { return -x[0]; };
  s.grad_cost = [](const Vector&) { return scalar(-1.0); };
  s.hess_cost = [](const Vector&) { return scalar_matrix(0.0); };

  auto a = [](double t) { return 1.0 + 3.0 * std::exp(2.5 * t); };
  const double denom = std::exp(-5.0) + 9.0 * std::exp(5.0) + 6.0;
  AnalyticSolution o;
  o.state = [a](double t) { return scalar(4.0 / a(t)); };
  o.control = [a](double t) { return scalar(2.0 / a(t)); };
  o.costate = [a, denom](double t) {
    const double at = a(t);
    return scalar(-at * at * std::exp(-2.5 * t) / denom);
  };
  o.state_rate = [a](double t) {
    const double at = a(t);
    return scalar(-30.0 * std::exp(2.5 * t) / (at * at));
  };
  p.oracle = o;
  return p;
}

BuiltinProblem make_quadratic_drift() {
  BuiltinProblem p;
  p.description = "min -x(1), x' = -u^2, x(-1) = 1; optimum u = 0, x = 1, lambda = -1";
  ProblemSpec& s = p.spec;
  s.name = "quadratic-drift";
  s.state_dim = 1;
  s.control_dim = 1;
  s.t0 = -1.0;
  s.tf = 1.0;
  s.x0 = scalar(1.0);
  s.dynamics = [](const Vector&, const Vector& u) { return scalar(-u[0] * u[0]); };
  s.jac_x = [](const Vector&, const Vector&) { return scalar_matrix(0.0); };
  s.jac_u = [](const Vector&, const Vector& u) { return scalar_matrix(-2.0 * u[0]); };
  s.hess_xx = [](const Vector&, const Vector&, const Vector&) { return scalar_matrix(0.0); };
  s.hess_xu = [](const Vector&, const Vector&, const Vector&) { return scalar_matrix(0.0); };
  s.hess_uu = [](const Vector&, const Vector&, const Vector& l) { return scalar_matrix(-2.0 * l[0]); };
  s.cost = [](const Vector& x) { return -x[0]; };
  s.grad_cost = [](const Vector&) { return scalar(-1.0); };
  s.hess_cost = [](const Vector&) { return scalar_matrix(0.0); };

  AnalyticSolution o;
  o.state = [](double) { return scalar(1.0); };
  o.control = [](double) { return scalar(0.0); };
  o.costate = [](double) { return scalar(-1.0); };
  o.state_rate = [](double) { return scalar(0.0); };
  p.oracle = o;
  return p;
}

// Scalar LQ regulator y' = u with running cost (y^2 + u^2)/2 carried in the
// augmented state z, terminal cost y(1)^2/2.  The Riccati solution is p = 1.
BuiltinProblem make_lq_example() {
  BuiltinProblem p;
  p.description = "min z(1) + y(1)^2/2, y' = u, z' = (y^2 + u^2)/2, y(0) = 1, z(0) = 0, t in [0, 1]";
  ProblemSpec& s = p.spec;
  s.name = "lq-example";
  s.state_dim = 2;
  s.control_dim = 1;
  s.t0 = 0.0;
  s.tf = 1.0;
  s.x0 = Vector(2);
  s.x0 << 1.0, 0.0;
  s.dynamics = [](const Vector& x, const Vector& u) {
    Vector f(2);
    f << u[0], 0.5 * (x[0] * x[0] + u[0] * u[0]);
    return f;
  };
  s.jac_x = [](const Vector& x, const Vector&) {
    Matrix a = Matrix::Zero(2, 2);
    a(1, 0) = x[0];
    return a;
  };
  s.jac_u = [](const Vector&, const Vector& u) {
    Matrix b(2, 1);
    b << 1.0, u[0];
    return b;
  };
  s.hess_xx = [](const Vector&, const Vector&, const Vector& l) {
    Matrix q = Matrix::Zero(2, 2);
    q(0, 0) = l[1];
    return q;
  };
  s.hess_xu = [](const Vector&, const Vector&, const Vector&) { return Matrix(Matrix::Zero(2, 1)); };
  s.hess_uu = [](const Vector&, const Vector&, const Vector& l) { return scalar_matrix(l[1]); };
  s.cost = [](const Vector& x) { return x[1] + 0.5 * x[0] * x[0]; };
  s.grad_cost = [](const Vector& x) {
    Vector g(2);
    g << x[0], 1.0;
    return g;
  };
  s.hess_cost = [](const Vector&) {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 1.0;
    return h;
  };

  AnalyticSolution o;
  o.state = [](double t) {
    Vector x(2);
    x << std::exp(-t), 0.5 * (1.0 - std::exp(-2.0 * t));
    return x;
  };
  o.control = [](double t) { return scalar(-std::exp(-t)); };
  o.costate = [](double t) {
    Vector l(2);
    l << std::exp(-t), 1.0;
    return l;
  };
  o.state_rate = [](double t) {
    Vector v(2);
    v << -std::exp(-t), std::exp(-2.0 * t);
    return v;
  };
  p.oracle = o;
  return p;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"hager-example", "quadratic-drift", "lq-example"};
  return names;
}

BuiltinProblem builtin_problem(std::string_view name) {
  if (name == "hager-example") return make_exponential_example();
  if (name == "quadratic-drift") return make_quadratic_drift();
  if (name == "lq-example") return make_lq_example();
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

BuiltinProblem builtin_example() { return make_exponential_example(); }

}  // namespace gausscol
