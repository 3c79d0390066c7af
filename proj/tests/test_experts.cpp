#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "esmc/errors.hpp"
#include "esmc/experts.hpp"
#include "esmc/rng.hpp"

using namespace esmc;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// E[log G(-lambda z, xi)] under z ~ N(mu, var); log G is quadratic in z.
double expected_log_bound(double mu, double var, double lambda, double xi) {
  const double tau = bound_curvature(xi);
  return std::log(sigmoid(xi)) + 0.5 * (-lambda * mu - xi) -
         tau * (lambda * lambda * (mu * mu + var) - xi * xi);
}

}  // namespace

TEST_CASE("marginal_label_prob closed-form cases") {
  // B = 1 collapses to the plain sigmoid
  ExpertConfig one{1, 0.7};
  for (double z : {-3.0, -0.2, 0.0, 1.4})
    CHECK(marginal_label_prob(z, one) == doctest::Approx(sigmoid(0.7 * z)).epsilon(1e-15));

  // B = 3 at p = 0.8
  ExpertConfig three{3, 1.0};
  const double z = logit(0.8);
  CHECK(marginal_label_prob(z, three) == doctest::Approx(0.512 / 0.712).epsilon(1e-9));
  CHECK(0.512 / 0.712 == doctest::Approx(0.7191011).epsilon(1e-6));

  // B = 20 at the curve midpoint
  CHECK(marginal_label_prob_from_p(0.5, 20) == doctest::Approx(1.9073449e-6).epsilon(1e-6));
}

TEST_CASE("brute-force enumeration equals the closed form") {
  ExpertConfig two{2, 1.0};
  CHECK(brute_force_marginal(0.0, two) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  ExpertConfig ten{10, 1.0};
  const double z = logit(0.9);
  CHECK(brute_force_marginal(z, ten) ==
        doctest::Approx(marginal_label_prob(z, ten)).epsilon(1e-12));

  for (int b = 1; b <= 12; ++b) {
    ExpertConfig cfg{b, 1.0};
    for (int pi = 1; pi <= 99; ++pi) {
      const double zz = logit(pi / 100.0);
      CHECK(std::fabs(brute_force_marginal(zz, cfg) - marginal_label_prob(zz, cfg)) < 1e-12);
    }
  }

  CHECK_THROWS_AS(brute_force_marginal(0.0, ExpertConfig{17, 1.0}), BudgetExceededError);
}

TEST_CASE("marginal is monotone and saturates") {
  for (int pi = 1; pi <= 99; ++pi) {
    const double p = pi / 100.0;
    double prev = marginal_label_prob_from_p(p, 1);
    CHECK(prev == doctest::Approx(p).epsilon(1e-15));
    for (int b = 2; b <= 30; ++b) {
      const double cur = marginal_label_prob_from_p(p, b);
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
  }

  // monotone nondecreasing in z
  ExpertConfig cfg{5, 1.0};
  double prev = -1.0;
  for (double z = -10.0; z <= 10.0; z += 0.25) {
    const double cur = marginal_label_prob(z, cfg);
    CHECK(cur >= prev);
    prev = cur;
  }

  for (int b : {1, 4, 12}) {
    ExpertConfig c{b, 1.0};
    CHECK(marginal_label_prob(40.0, c) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(marginal_label_prob(-40.0, c) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("sigmoid_bound values and evenness") {
  CHECK(sigmoid_bound(1.0, 1.0) == doctest::Approx(sigmoid(1.0)).epsilon(1e-15));
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310586).epsilon(1e-6));

  const double g01 = sigmoid_bound(0.0, 1.0);
  CHECK(g01 == doctest::Approx(0.7310586 * std::exp(-0.5 + 0.4621172 / 4.0)).epsilon(1e-6));
  CHECK(g01 == doctest::Approx(0.4978).epsilon(1e-3));
  CHECK(g01 <= 0.5);

  esmc::Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const double tt = 8.0 * (rng.uniform() - 0.5);
    const double xx = 6.0 * rng.uniform();
    CHECK(std::fabs(sigmoid_bound(tt, xx) - sigmoid_bound(tt, -xx)) < 1e-12);
  }
}

TEST_CASE("bound dominance on a grid") {
  for (int ti = -200; ti <= 200; ++ti) {
    const double t = 0.05 * ti;
    for (int xi = 0; xi <= 200; ++xi) {
      const double x = 0.05 * xi;
      CHECK(sigmoid(t) - sigmoid_bound(t, x) >= -1e-12);
    }
  }
  for (double x : {0.0, 0.5, 1.0, 3.0, 10.0}) {
    CHECK(std::fabs(sigmoid_bound(x, x) - sigmoid(x)) < 1e-12);
    CHECK(std::fabs(sigmoid_bound(-x, x) - sigmoid(-x)) < 1e-12);
  }
}

TEST_CASE("bound curvature limit at zero") {
  CHECK(bound_curvature(0.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(bound_curvature(1e-6) == doctest::Approx(0.125).epsilon(1e-10));
  CHECK(bound_curvature(1.0) == doctest::Approx(std::tanh(0.5) / 4.0).epsilon(1e-15));
}

TEST_CASE("expert responsibilities") {
  ExpertConfig cfg{4, 1.0};
  for (double z : {-2.0, 0.0, 5.0}) {
    const auto [r1, rest] = expert_responsibilities(1, z, cfg);
    CHECK(r1 == 1.0);
    CHECK(rest == 1.0);
  }
  {
    const auto [r1, rest] = expert_responsibilities(0, 0.0, cfg);
    CHECK(r1 == 0.0);
    CHECK(rest == 0.5);
  }
  {
    ExpertConfig lam2{4, 2.0};
    const auto [r1, rest] = expert_responsibilities(0, 1.0, lam2);
    CHECK(r1 == 0.0);
    CHECK(rest == doctest::Approx(sigmoid(2.0)).epsilon(1e-15));
    CHECK(rest == doctest::Approx(0.8808).epsilon(1e-4));
  }
  CHECK_THROWS_AS(expert_responsibilities(2, 0.0, cfg), InvalidArgumentError);
}

TEST_CASE("update_xi values") {
  ExpertConfig lam1{3, 1.0};
  CHECK(update_xi(-2.5, 0.0, lam1) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(update_xi(0.0, 4.0, lam1) == doctest::Approx(2.0).epsilon(1e-15));
  ExpertConfig lam2{3, 2.0};
  CHECK(update_xi(3.0, 16.0, lam2) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK_THROWS_AS(update_xi(0.0, -1.0, lam1), InvalidArgumentError);
}

TEST_CASE("update_xi maximizes the expected log bound") {
  esmc::Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const double mu = 4.0 * (rng.uniform() - 0.5);
    const double var = 3.0 * rng.uniform();
    const double lambda = 0.5 + 2.0 * rng.uniform();
    ExpertConfig cfg{3, lambda};
    const double star = update_xi(mu, var, cfg);
    const double best = expected_log_bound(mu, var, lambda, star);
    for (int c = 0; c < 100; ++c) {
      const double competitor = 10.0 * rng.uniform();
      CHECK(best >= expected_log_bound(mu, var, lambda, competitor) - 1e-12);
    }
  }
}
