#include "gausscol/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gausscol {

std::pair<double, double> legendre_eval(int degree, double t) {
  if (degree < 0) throw std::invalid_argument("legendre_eval: negative degree");
  if (degree == 0) return {1.0, 0.0};
  if (degree == 1) return {t, 1.0};

  // (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}
  double p_prev = 1.0;
  double p = t;
  for (int k = 1; k < degree; ++k) {
    const double p_next = ((2 * k + 1) * t * p - k * p_prev) / (k + 1);
    p_prev = p;
    p = p_next;
  }
  // P_n' = n (t P_n - P_{n-1}) / (t^2 - 1); valid in the open interval.
  const double denom = (t - 1.0) * (t + 1.0);
  double dp;
  if (denom == 0.0) {
    // P_n'(+-1) = (+-1)^{n+1} n(n+1)/2
    dp = 0.5 * degree * (degree + 1.0);
    if (t < 0.0 && degree % 2 == 0) dp = -dp;
  } else {
    dp = degree * (t * p - p_prev) / denom;
  }
  return {p, dp};
}

GaussRule gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: N must be >= 1, got " + std::to_string(n));

  GaussRule rule;
  rule.n_collocation = n;
  rule.nodes.assign(n + 2, 0.0);
  rule.weights.assign(n, 0.0);
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;

  constexpr int kMaxIterations = 100;
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  // Seed k (k = 1..ceil(N/2)) approximates the k-th largest root.
  const int half = (n + 1) / 2;
  for (int k = 1; k <= half; ++k) {
    double t;
    double dp = 0.0;
    if (n % 2 == 1 && k == half) {
      t = 0.0;
      dp = legendre_eval(n, 0.0).second;
    } else {
      t = std::cos(std::numbers::pi * (4.0 * k - 1.0) / (4.0 * n + 2.0));
      bool converged = false;
      double prev_step = std::numeric_limits<double>::infinity();
      for (int it = 0; it < kMaxIterations; ++it) {
        auto [p, d] = legendre_eval(n, t);
        const double step = p / d;
        t -= step;
        // Relative step at the ulp level, or a step of rounding size that
        // no longer shrinks (roots near zero, where an ulp of t is tiny).
        if (std::abs(step) <= 2.0 * kEps * std::abs(t) ||
            (std::abs(step) <= 8.0 * kEps && std::abs(step) >= std::abs(prev_step))) {
          converged = true;
          break;
        }
        prev_step = step;
      }
      if (!converged) {
        throw std::runtime_error("gauss_rule: Newton failed to converge for root " + std::to_string(k) +
                                 " of P_" + std::to_string(n));
      }
      dp = legendre_eval(n, t).second;
    }
    const double w = 2.0 / ((1.0 - t) * (1.0 + t) * dp * dp);
    // k-th largest root sits at index N + 1 - k; its mirror at index k.
    rule.nodes[n + 1 - k] = t;
    rule.nodes[k] = -t;
    rule.weights[n - k] = w;
    rule.weights[k - 1] = w;
  }
  if (n % 2 == 1) rule.nodes[half] = 0.0;  // avoid storing -0.0 from the mirror
  return rule;
}

double quad_integrate(const GaussRule& rule, std::span<const double> samples) {
  if (samples.size() != rule.weights.size()) {
    throw std::invalid_argument("quad_integrate: expected " + std::to_string(rule.weights.size()) +
                                " samples, got " + std::to_string(samples.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) sum += rule.weights[i] * samples[i];
  return sum;
}

}  // namespace gausscol
