#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "esmc/errors.hpp"
#include "esmc/sparse_gp.hpp"
#include "support.hpp"

using namespace esmc;

namespace {

SparseGpLayer make_layer(Matrix pseudo_points, double bandwidth, double input_noise,
                         Matrix value_mean) {
  SparseGpLayer layer;
  layer.pseudo = PseudoSet{std::move(pseudo_points), KernelConfig{bandwidth}, input_noise};
  layer.out_dim = static_cast<int>(value_mean.cols());
  layer.value_mean = std::move(value_mean);
  layer.cov_chol = Matrix::Identity(layer.pseudo.count(), layer.pseudo.count());
  return layer;
}

}  // namespace

TEST_CASE("projection single pseudo-point limits") {
  Matrix s(1, 2);
  s << 0.5, -1.0;

  {
    auto layer = make_layer(s, 1.0, 1e-9, Matrix::Zero(1, 1));
    const Matrix a = projection(layer, s);
    CHECK(a(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    // input at distance sigma from the pseudo-point, vanishing noise
    auto layer = make_layer(s, 1.0, 1e-9, Matrix::Zero(1, 1));
    Matrix x(1, 2);
    x << 0.5 + 1.0, -1.0;
    const Matrix a = projection(layer, x);
    CHECK(a(0, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
  }
}

TEST_CASE("projection agrees with a direct 2x2 inverse") {
  Matrix s(2, 1);
  s << 0.0, 1.5;
  const double alpha = 0.3, bw = 1.1;
  auto layer = make_layer(s, bw, alpha, Matrix::Zero(2, 1));

  esmc::Rng rng(21);
  const Matrix x = testsupport::random_matrix(7, 1, rng);
  const Matrix a = projection(layer, x);

  // independent route: explicit 2x2 inverse
  const double off = std::exp(-0.5 * std::pow((s(0, 0) - s(1, 0)) / bw, 2));
  const double d = 1.0 + alpha * alpha;
  const double det = d * d - off * off;
  Matrix inv(2, 2);
  inv << d / det, -off / det, -off / det, d / det;
  const Matrix kxs = cross_gram(x, s, KernelConfig{bw});
  const Matrix expected = kxs * inv;
  CHECK((a - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("predict_mean basics") {
  esmc::Rng rng(4);
  Matrix s = testsupport::random_matrix(4, 3, rng);

  {
    auto layer = make_layer(s, 1.0, 0.1, Matrix::Zero(4, 2));
    const Matrix out = predict_mean(layer, testsupport::random_matrix(6, 3, rng));
    CHECK(out.isZero(0.0));
  }
  {
    Matrix point(1, 3);
    point << 1.0, 2.0, 3.0;
    Matrix u(1, 2);
    u << -0.7, 2.2;
    auto layer = make_layer(point, 1.0, 1e-9, u);
    const Matrix out = predict_mean(layer, point);
    CHECK(out(0, 0) == doctest::Approx(-0.7).epsilon(1e-9));
    CHECK(out(0, 1) == doctest::Approx(2.2).epsilon(1e-9));
  }
}

TEST_CASE("predict_mean reproduces targets in the full-GP limit") {
  esmc::Rng rng(17);
  const Matrix x = 2.0 * testsupport::random_matrix(12, 2, rng);
  const Matrix targets = testsupport::random_matrix(12, 3, rng);
  auto layer = make_layer(x, 1.0, 1e-6, Matrix());

  // with pseudo-points equal to the inputs, solve for values that make the
  // projection reproduce noiseless targets
  Matrix g = gram(x, KernelConfig{1.0});
  g.diagonal().array() += 1e-12;
  layer.value_mean = (g + Matrix::Identity(12, 12) * 1e-12).ldlt().solve(g * targets);
  // value_mean == targets in exact arithmetic; interpolation check:
  const Matrix out = predict_mean(layer, x);
  CHECK((out - targets).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("prior_precision examples") {
  {
    Matrix s(1, 1);
    s << 3.0;
    const double alpha = 0.25;
    const Matrix p = prior_precision(PseudoSet{s, KernelConfig{2.0}, alpha});
    CHECK(p(0, 0) == doctest::Approx(1.0 / (1.0 + alpha * alpha)).epsilon(1e-12));
  }
  {
    // coincident pseudo-points stay invertible thanks to the noise term
    Matrix s(2, 2);
    s << 1.0, 1.0, 1.0, 1.0;
    const Matrix p = prior_precision(PseudoSet{s, KernelConfig{1.0}, 0.1});
    Matrix expected(2, 2);
    const double d = 1.01, o = 1.0, det = d * d - o * o;
    expected << d / det, -o / det, -o / det, d / det;
    CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
  {
    esmc::Rng rng(2);
    const Matrix s = testsupport::random_matrix(6, 2, rng);
    const PseudoSet ps{s, KernelConfig{1.0}, 0.2};
    Matrix g = gram(s, KernelConfig{1.0});
    g.diagonal().array() += 0.04;
    const Matrix prod = prior_precision(ps) * g;
    CHECK((prod - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("chol_solve examples") {
  {
    const Matrix rhs = Matrix::Random(4, 2);
    CHECK(chol_solve(Matrix::Identity(4, 4), rhs) == rhs);
  }
  {
    Matrix d(2, 2);
    d << 2.0, 0.0, 0.0, 4.0;
    Matrix rhs(2, 1);
    rhs << 2.0, 4.0;
    const Matrix x = chol_solve(d, rhs);
    CHECK(x(0, 0) == doctest::Approx(1.0));
    CHECK(x(1, 0) == doctest::Approx(1.0));
  }
  {
    esmc::Rng rng(8);
    const Matrix a = testsupport::random_matrix(5, 5, rng);
    const Matrix spd = a * a.transpose() + 0.5 * Matrix::Identity(5, 5);
    const Matrix rhs = testsupport::random_matrix(5, 3, rng);
    const Matrix x = chol_solve(spd, rhs);
    CHECK((spd * x - rhs).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK_THROWS_AS(chol_solve(Matrix::Zero(3, 3) - Matrix::Identity(3, 3), Matrix::Ones(3, 1)),
                  NumericalError);
}

TEST_CASE("projection is exact on the pseudo-set in the small-noise limit") {
  esmc::Rng rng(31);
  const Matrix s = testsupport::random_matrix(5, 2, rng);
  const Matrix u = testsupport::random_matrix(5, 3, rng);
  auto layer = make_layer(s, 1.2, 1e-9, u);
  const Matrix out = predict_mean(layer, s);
  CHECK((out - u).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("predict_mean is linear in value_mean") {
  esmc::Rng rng(32);
  const Matrix s = testsupport::random_matrix(4, 2, rng);
  const Matrix x = testsupport::random_matrix(9, 2, rng);
  const Matrix u1 = testsupport::random_matrix(4, 2, rng);
  const Matrix u2 = testsupport::random_matrix(4, 2, rng);
  auto layer_sum = make_layer(s, 0.8, 0.1, u1 + u2);
  auto layer1 = make_layer(s, 0.8, 0.1, u1);
  auto layer2 = make_layer(s, 0.8, 0.1, u2);
  const Matrix lhs = predict_mean(layer_sum, x);
  const Matrix rhs = predict_mean(layer1, x) + predict_mean(layer2, x);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("predict_mean is invariant under joint pseudo permutations") {
  esmc::Rng rng(33);
  const Matrix s = testsupport::random_matrix(6, 2, rng);
  const Matrix u = testsupport::random_matrix(6, 2, rng);
  const Matrix x = testsupport::random_matrix(11, 2, rng);

  std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  Matrix sp(6, 2), up(6, 2);
  for (int i = 0; i < 6; ++i) {
    sp.row(i) = s.row(perm[i]);
    up.row(i) = u.row(perm[i]);
  }
  auto a = make_layer(s, 1.0, 0.2, u);
  auto b = make_layer(sp, 1.0, 0.2, up);
  CHECK((predict_mean(a, x) - predict_mean(b, x)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("projection rejects dimension mismatches") {
  Matrix s(2, 3);
  s.setZero();
  auto layer = make_layer(s, 1.0, 0.1, Matrix::Zero(2, 1));
  CHECK_THROWS_AS(projection(layer, Matrix::Zero(4, 2)), InvalidArgumentError);
}
