#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "esmc/errors.hpp"
#include "esmc/model.hpp"
#include "support.hpp"

using namespace esmc;

TEST_CASE("choose_num_experts follows the zero/one ratio with a cap") {
  {
    Matrix y = Matrix::Zero(10, 10);
    for (int i = 0; i < 10; ++i) y(i, 0) = 1.0;  // 10 ones, 90 zeros
    CHECK(choose_num_experts(y) == 9);
  }
  {
    Matrix y = Matrix::Zero(1000, 1000);
    y(0, 0) = 1.0;
    CHECK(choose_num_experts(y) == 100);
  }
  {
    Matrix y = Matrix::Zero(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int k = 0; k < 5; ++k) y(i, k) = 1.0;  // 50/50
    CHECK(choose_num_experts(y) == 1);
  }
  {
    Matrix y = Matrix::Ones(3, 3);  // more ones than zeros: ratio floors to 0
    CHECK(choose_num_experts(y) == 1);
  }
  CHECK_THROWS_AS(choose_num_experts(Matrix::Zero(4, 4)), DegenerateInputError);
}

TEST_CASE("choose_num_pseudo branches") {
  CHECK(choose_num_pseudo(5000) == 500);
  CHECK(choose_num_pseudo(15000) == 150);
  CHECK(choose_num_pseudo(30000) == 400);
  CHECK(choose_num_pseudo(20000) == 400);  // boundary goes with the large regime
  CHECK(choose_num_pseudo(9999) == 1000);
  CHECK(choose_num_pseudo(10000) == 100);
  CHECK(choose_num_pseudo(1) == 1);
  CHECK(choose_num_pseudo(3) == 1);
  CHECK(choose_num_pseudo(11) == 2);
  CHECK_THROWS_AS(choose_num_pseudo(0), InvalidArgumentError);
}

namespace {

HyperParams small_hp() {
  HyperParams hp;
  hp.latent_dim = 2;
  hp.expert_cfg = ExpertConfig{3, 1.0};
  hp.pseudo_c = 5;
  hp.pseudo_z = 5;
  return hp;
}

}  // namespace

TEST_CASE("sample_dataset is deterministic and well-formed") {
  const auto [d1, z1] = sample_dataset(small_hp(), 30, 10, 4, 6, 99);
  const auto [d2, z2] = sample_dataset(small_hp(), 30, 10, 4, 6, 99);
  CHECK(d1.features == d2.features);
  CHECK(d1.labels == d2.labels);
  CHECK(z1 == z2);

  const auto [d3, z3] = sample_dataset(small_hp(), 30, 10, 4, 6, 100);
  CHECK(d1.features != d3.features);

  CHECK(d1.n_labeled == 30);
  CHECK(d1.n_unlabeled == 10);
  CHECK(d1.features.rows() == 40);
  CHECK(d1.labels.rows() == 30);
  CHECK(z1.rows() == 40);
  CHECK(z1.allFinite());
  for (int i = 0; i < d1.labels.rows(); ++i)
    for (int k = 0; k < d1.labels.cols(); ++k)
      CHECK((d1.labels(i, k) == 0.0 || d1.labels(i, k) == 1.0));
}

TEST_CASE("sample_dataset with no unlabeled block labels every instance") {
  const auto [d, z] = sample_dataset(small_hp(), 25, 0, 3, 5, 7);
  CHECK(d.n_labeled == 25);
  CHECK(d.labels.rows() == d.features.rows());
}

TEST_CASE("sample_dataset rejects bad sizes") {
  CHECK_THROWS_AS(sample_dataset(small_hp(), 0, 5, 3, 4, 1), InvalidArgumentError);
  HyperParams hp = small_hp();
  hp.pseudo_c = 50;
  CHECK_THROWS_AS(sample_dataset(hp, 10, 0, 3, 4, 1), InvalidArgumentError);
}

TEST_CASE("label draws match the expert marginal empirically") {
  const ExpertConfig cfg{4, 1.0};
  Rng rng(2024);
  for (double z : {-1.0, 0.3, 1.5}) {
    const int reps = 100000;
    long hits = 0;
    for (int r = 0; r < reps; ++r) hits += sample_label(z, cfg, rng);
    const double expected = marginal_label_prob(z, cfg);
    const double freq = static_cast<double>(hits) / reps;
    const double se = std::sqrt(expected * (1.0 - expected) / reps);
    CHECK(std::fabs(freq - expected) < 3.0 * se + 1e-12);
  }
}
