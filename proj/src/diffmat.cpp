#include "gausscol/diffmat.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <string>

namespace gausscol {

Vector barycentric_weights(std::span<const double> nodes) {
  const auto count = static_cast<Eigen::Index>(nodes.size());
  if (count == 0) throw std::invalid_argument("barycentric_weights: empty node set");
  // Differences are scaled by 2 (four times the capacity of [-1, 1]) so
  // the products stay O(1) for large node counts.
  Vector w(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < count; ++k) {
      if (k != j) prod *= 2.0 * (nodes[j] - nodes[k]);
    }
    w[j] = 1.0 / prod;
  }
  return w;
}

std::span<const double> node_span(const GaussRule& rule, NodeSet set) {
  const auto n = static_cast<std::size_t>(rule.n_collocation);
  switch (set) {
    case NodeSet::state:
      return {rule.nodes.data(), n + 1};
    case NodeSet::costate:
      return {rule.nodes.data() + 1, n + 1};
    case NodeSet::interior:
      return {rule.nodes.data() + 1, n};
  }
  throw std::invalid_argument("node_span: unknown node set");
}

Vector gauss_barycentric_weights(const GaussRule& rule, NodeSet set) {
  const int n = rule.n_collocation;
  auto interior = [&](int i) { return legendre_eval(n, rule.nodes[i]).second; };
  Vector w;
  switch (set) {
    case NodeSet::state:
      // l(t) = (1 + t) P_N(t); l'(-1) = P_N(-1) = (-1)^N
      w.resize(n + 1);
      w[0] = (n % 2 == 0) ? 1.0 : -1.0;
      for (int i = 1; i <= n; ++i) w[i] = 1.0 / ((1.0 + rule.nodes[i]) * interior(i));
      break;
    case NodeSet::costate:
      // l(t) = (t - 1) P_N(t); l'(1) = P_N(1) = 1
      w.resize(n + 1);
      for (int i = 1; i <= n; ++i) w[i - 1] = 1.0 / ((rule.nodes[i] - 1.0) * interior(i));
      w[n] = 1.0;
      break;
    case NodeSet::interior:
      w.resize(n);
      for (int i = 1; i <= n; ++i) w[i - 1] = 1.0 / interior(i);
      break;
  }
  return w;
}

Matrix build_D(const GaussRule& rule) {
  const int n = rule.n_collocation;
  const Vector w = gauss_barycentric_weights(rule, NodeSet::state);

  Matrix d = Matrix::Zero(n, n + 1);
  for (int i = 1; i <= n; ++i) {
    const double ti = rule.nodes[i];
    for (int j = 0; j <= n; ++j) {
      if (j == i) continue;
      d(i - 1, j) = (w[j] / w[i]) / (ti - rule.nodes[j]);
    }
    d(i - 1, i) = 1.0 / ((1.0 - ti) * (1.0 + ti));
  }
  return d;
}

Matrix build_Ddag(const GaussRule& rule, const Matrix& D) {
  const int n = rule.n_collocation;
  if (D.rows() != n || D.cols() != n + 1) throw std::invalid_argument("build_Ddag: D has wrong shape");
  Matrix ddag(n, n + 1);
  for (int i = 1; i <= n; ++i) {
    double sum = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double v = -(rule.omega(j) / rule.omega(i)) * D(j - 1, i);
      ddag(i - 1, j - 1) = v;
      sum += v;
    }
    ddag(i - 1, n) = -sum;
  }
  return ddag;
}

DiffMatrices build_diff_matrices(const GaussRule& rule) {
  DiffMatrices dm;
  dm.rule = rule;
  dm.D = build_D(rule);
  dm.Ddag = build_Ddag(rule, dm.D);
  dm.bary_weights_state = gauss_barycentric_weights(rule, NodeSet::state);
  dm.bary_weights_costate = gauss_barycentric_weights(rule, NodeSet::costate);
  return dm;
}

DiffMatrices build_diff_matrices(int n) { return build_diff_matrices(gauss_rule(n)); }

Vector differentiate(const DiffMatrices& dm, const Vector& nodal_values) {
  if (nodal_values.size() != dm.D.cols()) {
    throw std::invalid_argument("differentiate: expected " + std::to_string(dm.D.cols()) + " nodal values, got " +
                                std::to_string(nodal_values.size()));
  }
  return dm.D * nodal_values;
}

double flip_identity_deviation(const DiffMatrices& dm) {
  const int n = dm.size();
  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // D_{1:N}(i, j) is D(i, j + 1); (J Ddag J)(i, j) = Ddag(n-1-i, n-1-j).
      dev = std::max(dev, std::abs(dm.D(i, j + 1) + dm.Ddag(n - 1 - i, n - 1 - j)));
    }
  }
  return dev;
}

P1Check check_P1(const DiffMatrices& dm) {
  const int n = dm.size();
  const DenseLU lu(dm.D.rightCols(n));
  P1Check out;
  if (lu.singular()) return out;
  out.invertible = true;
  out.norm = lu.inverse().cwiseAbs().rowwise().sum().maxCoeff();
  return out;
}

P1Check check_P1(int n) { return check_P1(build_diff_matrices(n)); }

P2Check check_P2(const DiffMatrices& dm) {
  const int n = dm.size();
  Matrix scaled = dm.D.rightCols(n);
  for (int i = 0; i < n; ++i) scaled.row(i) *= std::sqrt(dm.rule.weights[i]);
  const DenseLU lu(scaled);
  P2Check out;
  if (lu.singular()) return out;
  out.invertible = true;
  const Vector row_norms = lu.inverse().rowwise().norm();
  Eigen::Index arg = 0;
  out.max_row_norm = row_norms.maxCoeff(&arg);
  out.argmax_row = static_cast<int>(arg) + 1;
  return out;
}

P2Check check_P2(int n) { return check_P2(build_diff_matrices(n)); }

namespace {

CertificationRow certify_one(int n) {
  const DiffMatrices dm = build_diff_matrices(n);
  CertificationRow row;
  row.n = n;
  row.tau_n = dm.rule.tau(n);
  row.p1 = check_P1(dm);
  row.p2 = check_P2(dm);
  row.p1_minus_one_plus_tau_n = row.p1.invertible ? std::abs(row.p1.norm - (1.0 + row.tau_n)) : NAN;
  row.flip_max_dev = flip_identity_deviation(dm);
  row.p1_flagged = !row.p1.invertible || row.p1.norm > 2.0 + kCertifySlack;
  row.p2_flagged = !row.p2.invertible || row.p2.max_row_norm > std::sqrt(2.0) + kCertifySlack;
  return row;
}

}  // namespace

bool CertificationReport::flagged() const {
  for (const auto& r : rows) {
    if (r.p1_flagged || r.p2_flagged) return true;
  }
  return false;
}

CertificationReport certify(std::span<const int> n_list) {
  if (n_list.empty()) throw std::invalid_argument("certify: empty N list");
  for (int n : n_list) {
    if (n < 1) throw std::invalid_argument("certify: N must be >= 1, got " + std::to_string(n));
  }
  std::vector<std::future<CertificationRow>> pending;
  pending.reserve(n_list.size());
  for (int n : n_list) pending.push_back(std::async(std::launch::async, certify_one, n));

  CertificationReport report;
  for (auto& f : pending) report.rows.push_back(f.get());
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    if (report.rows[k].n > report.rows[k - 1].n && report.rows[k].p1.norm < report.rows[k - 1].p1.norm) {
      report.p1_nondecreasing = false;
    }
  }
  return report;
}

}  // namespace gausscol
