#pragma once

#include <span>
#include <vector>

#include "gausscol/linalg.hpp"
#include "gausscol/quadrature.hpp"

namespace gausscol {

/// Differentiation matrices of the Gauss collocation scheme.
///
/// D is N x (N+1): row r corresponds to collocation point tau_{r+1},
/// column j to the interpolation node tau_j, j = 0..N.  Ddag is
/// N x (N+1) with column c corresponding to tau_{c+1}, i.e. nodes 1..N+1;
/// it drives the discrete costate equation.
struct DiffMatrices {
  GaussRule rule;
  Matrix D;
  Matrix Ddag;
  Vector bary_weights_state;    // nodes tau_0..tau_N
  Vector bary_weights_costate;  // nodes tau_1..tau_{N+1}

  int size() const { return rule.n_collocation; }
};

/// Barycentric weights 1 / prod_{k != j} (x_j - x_k), rescaled by a common
/// factor to stay within floating-point range.  Only ratios are meaningful.
Vector barycentric_weights(std::span<const double> nodes);

/// Node sets over which Lagrange interpolants are built.
enum class NodeSet {
  state,     // tau_0..tau_N
  costate,   // tau_1..tau_{N+1}
  interior,  // tau_1..tau_N
};

/// Barycentric weights of a Gauss node set from the derivative of its node
/// polynomial, (1 + t) P_N(t), (t - 1) P_N(t) or P_N(t).  Equal to
/// barycentric_weights() up to a common factor, without the O(N eps)
/// product rounding.
Vector gauss_barycentric_weights(const GaussRule& rule, NodeSet set);

/// The nodes belonging to a node set, in increasing order.
std::span<const double> node_span(const GaussRule& rule, NodeSet set);

/// D_ij = L_j'(tau_i) on the node set tau_0..tau_N, 1 <= i <= N.
///
/// Off-diagonal entries use the barycentric form (w_j / w_i) / (tau_i - tau_j).
/// At a Gauss point the node polynomial (1 + t) P_N(t) gives the diagonal in
/// closed form, D_ii = 1 / (1 - tau_i^2), which is used in place of the
/// negative row sum; the row-sum rule loses about three digits near the
/// endpoints once N reaches 100.
Matrix build_D(const GaussRule& rule);

/// Ddag_ij = -(omega_j / omega_i) D_ji for 1 <= i, j <= N, and the last
/// column is minus the row sum of the first N.
Matrix build_Ddag(const GaussRule& rule, const Matrix& D);

DiffMatrices build_diff_matrices(const GaussRule& rule);
DiffMatrices build_diff_matrices(int n);

/// D * nodal_values, nodal_values holding p(tau_0..tau_N).
Vector differentiate(const DiffMatrices& dm, const Vector& nodal_values);

/// max |D_{1:N} + J Ddag_{1:N} J|, J the exchange matrix.
double flip_identity_deviation(const DiffMatrices& dm);

struct P1Check {
  bool invertible = false;
  double norm = 0.0;  // ||D_{1:N}^{-1}||_inf
};

struct P2Check {
  bool invertible = false;
  double max_row_norm = 0.0;  // max Euclidean row norm of [W^{1/2} D_{1:N}]^{-1}
  int argmax_row = 0;         // 1-based row index
};

P1Check check_P1(const DiffMatrices& dm);
P1Check check_P1(int n);
P2Check check_P2(const DiffMatrices& dm);
P2Check check_P2(int n);

struct CertificationRow {
  int n = 0;
  double tau_n = 0.0;
  P1Check p1;
  double p1_minus_one_plus_tau_n = 0.0;  // |p1 - (1 + tau_N)|
  P2Check p2;
  double flip_max_dev = 0.0;
  bool p1_flagged = false;
  bool p2_flagged = false;
};

struct CertificationReport {
  std::vector<CertificationRow> rows;
  /// Observed only; the P1 norm is not required to be monotone.
  bool p1_nondecreasing = true;

  bool flagged() const;
};

/// Slack allowed above the bounds 2 (P1) and sqrt(2) (P2) before flagging.
inline constexpr double kCertifySlack = 1e-9;

/// Evaluates each N independently (concurrently when more than one).
CertificationReport certify(std::span<const int> n_list);

}  // namespace gausscol
