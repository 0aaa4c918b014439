#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gausscol {

/// Legendre--Gauss rule on [-1, 1] with the two noncollocated endpoints.
///
/// nodes holds N + 2 abscissas: nodes[0] = -1, nodes[1..N] are the roots
/// of P_N in increasing order, nodes[N+1] = +1.  weights holds the N
/// quadrature weights belonging to the interior nodes, so weights[i - 1]
/// pairs with nodes[i].
struct GaussRule {
  int n_collocation = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return n_collocation; }
  /// Interior abscissa tau_i, 1 <= i <= N.
  double tau(int i) const { return nodes[i]; }
  /// Weight omega_i, 1 <= i <= N.
  double omega(int i) const { return weights[i - 1]; }
};

/// P_n(t) and P_n'(t) from the three-term recurrence.
std::pair<double, double> legendre_eval(int degree, double t);

/// Roots of P_N by Newton iteration from Chebyshev-angle seeds.  Only the
/// upper half is computed; the lower half is its mirror image so the
/// symmetry of nodes and weights is exact.
///
/// Throws std::invalid_argument for N < 1 and std::runtime_error if Newton
/// fails to converge within 100 iterations for some root.
GaussRule gauss_rule(int n);

/// Sum of omega_i * samples[i - 1].  samples must have length N.
double quad_integrate(const GaussRule& rule, std::span<const double> samples);

}  // namespace gausscol
