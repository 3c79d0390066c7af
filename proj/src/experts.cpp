#include "esmc/experts.hpp"

#include <cmath>

#include "esmc/errors.hpp"

namespace esmc {

void ExpertConfig::validate() const {
  if (num_experts < 1)
    throw InvalidArgumentError("ExpertConfig: num_experts must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidArgumentError("ExpertConfig: lambda must be positive and finite");
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double marginal_label_prob_from_p(double p, int num_experts) {
  const double pb = std::pow(p, static_cast<double>(num_experts));
  const double denom = pb + 1.0 - p;
  if (denom <= 0.0) return 1.0;  // only reachable at p == 1 with rounding
  return pb / denom;
}

double marginal_label_prob(double z, const ExpertConfig& cfg) {
  cfg.validate();
  return marginal_label_prob_from_p(sigmoid(cfg.lambda * z), cfg.num_experts);
}

double brute_force_marginal(double z, const ExpertConfig& cfg) {
  cfg.validate();
  const int b = cfg.num_experts;
  if (b > 16)
    throw BudgetExceededError("brute_force_marginal: enumeration supports B <= 16");
  const double p = sigmoid(cfg.lambda * z);
  double w_one = 0.0;   // mass of configurations with y == 1
  double w_zero = 0.0;  // mass of configurations with y == 0
  for (unsigned cfg_bits = 0; cfg_bits < (1u << b); ++cfg_bits) {
    double w = 1.0;
    int fired = 0;
    for (int i = 0; i < b; ++i) {
      if (cfg_bits & (1u << i)) {
        w *= p;
        ++fired;
      } else {
        w *= 1.0 - p;
      }
    }
    const bool first_on = (cfg_bits & 1u) != 0;
    if (first_on && fired == b)
      w_one += w;
    else if (!first_on)
      w_zero += w;
    // first expert on but not all fired: fractional y, excluded
  }
  return w_one / (w_one + w_zero);
}

double bound_curvature(double xi) {
  const double a = std::fabs(xi);
  if (a < 1e-4) return 0.125 - a * a / 96.0;
  return std::tanh(0.5 * a) / (4.0 * a);
}

double sigmoid_bound(double t, double xi) {
  const double tau = bound_curvature(xi);
  const double a = std::fabs(xi);
  return sigmoid(a) * std::exp(0.5 * (t - a) - tau * (t * t - a * a));
}

std::pair<double, double> expert_responsibilities(int y, double z_mean,
                                                  const ExpertConfig& cfg) {
  cfg.validate();
  if (y != 0 && y != 1)
    throw InvalidArgumentError("expert_responsibilities: y must be 0 or 1");
  if (y == 1) return {1.0, 1.0};
  return {0.0, sigmoid(cfg.lambda * z_mean)};
}

double update_xi(double z_mean, double z_var, const ExpertConfig& cfg) {
  cfg.validate();
  if (z_var < 0.0)
    throw InvalidArgumentError("update_xi: z_var must be nonnegative");
  return cfg.lambda * std::sqrt(z_mean * z_mean + z_var);
}

}  // namespace esmc
