#pragma once

#include <utility>

#include "esmc/types.hpp"

namespace esmc {

/// Expert mechanism settings: B independent Bernoulli experts per
/// (instance, label) cell, each firing with probability sigmoid(lambda*z).
/// A label is emitted as present only when every expert fires, so missing
/// positive annotations stay plausible under large B.
struct ExpertConfig {
  int num_experts = 1;   // B
  double lambda = 1.0;   // suitability scale

  void validate() const;
};

/// Numerically stable logistic function.
double sigmoid(double t);

/// P(y = 1 | z) after marginalizing the experts:
///   p^B / (p^B + 1 - p)  with  p = sigmoid(lambda * z).
double marginal_label_prob(double z, const ExpertConfig& cfg);

/// Same marginal expressed directly in terms of p = sigmoid(lambda*z).
double marginal_label_prob_from_p(double p, int num_experts);

/// Oracle: enumerate all 2^B expert configurations, apply the
/// deterministic link y = E_1 * (sum_b E_b) / B, condition on y being
/// binary, and return P(y = 1). Supports B <= 16.
double brute_force_marginal(double z, const ExpertConfig& cfg);

/// Quadratic-exponential lower bound on the sigmoid:
///   G(t, xi) = sigmoid(xi) * exp((t - xi)/2 - tau(xi) * (t^2 - xi^2)),
/// with tau(xi) = tanh(xi/2) / (4 xi) and tau(0) = 1/8. G <= sigmoid(t),
/// with equality at t = +-xi; even in xi.
double sigmoid_bound(double t, double xi);

/// tau(xi) = tanh(xi/2) / (4 xi), continuous at 0.
double bound_curvature(double xi);

/// Variational expert responsibilities for one labeled cell.
/// y = 1 forces every expert on: (1, 1). y = 0 forces the first expert
/// off and leaves the rest at sigmoid(lambda * z_mean): (0, that).
std::pair<double, double> expert_responsibilities(int y, double z_mean,
                                                  const ExpertConfig& cfg);

/// Optimal bound parameter for a Gaussian q(z) with the given moments:
/// xi = lambda * sqrt(z_mean^2 + z_var). Reduces to lambda*|z_mean| when
/// the variance is zero.
double update_xi(double z_mean, double z_var, const ExpertConfig& cfg);

}  // namespace esmc
