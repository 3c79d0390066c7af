#include "esmc/model.hpp"

#include <algorithm>
#include <cmath>

#include "esmc/errors.hpp"
#include "esmc/kernel.hpp"
#include "esmc/sparse_gp.hpp"

namespace esmc {

void HyperParams::validate() const {
  if (latent_dim < 1) throw InvalidArgumentError("HyperParams: latent_dim must be >= 1");
  expert_cfg.validate();
  for (double v : {alpha_c, alpha_z, beta_c, beta_z})
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgumentError("HyperParams: noise scales must be positive");
  if (gamma_c < 0.0 || gamma_z < 0.0)
    throw InvalidArgumentError("HyperParams: gamma must be nonnegative");
  if (max_iters < 0) throw InvalidArgumentError("HyperParams: max_iters must be >= 0");
  if (!(elbo_tol > 0.0)) throw InvalidArgumentError("HyperParams: elbo_tol must be positive");
}

int choose_num_experts(const Matrix& labels) {
  long long ones = 0;
  for (int i = 0; i < labels.rows(); ++i)
    for (int k = 0; k < labels.cols(); ++k)
      if (labels(i, k) == 1.0) ++ones;
  if (ones == 0)
    throw DegenerateInputError("choose_num_experts: label matrix has no one-entries");
  const long long zeros = static_cast<long long>(labels.rows()) * labels.cols() - ones;
  const long long ratio = zeros / ones;  // floor
  return static_cast<int>(std::clamp<long long>(ratio, 1, 100));
}

int choose_num_pseudo(int n) {
  if (n < 1) throw InvalidArgumentError("choose_num_pseudo: n must be >= 1");
  if (n < 10000) return (n + 9) / 10;    // ceil(0.1 n)
  if (n < 20000) return (n + 99) / 100;  // ceil(0.01 n)
  return 400;
}

int sample_label(double z, const ExpertConfig& cfg, Rng& rng) {
  const double p = sigmoid(cfg.lambda * z);
  bool first_on = false;
  int fired = 0;
  for (int b = 0; b < cfg.num_experts; ++b) {
    const bool on = rng.uniform() < p;
    if (b == 0) first_on = on;
    if (on) ++fired;
  }
  if (first_on && fired == cfg.num_experts) return 1;
  if (!first_on) return 0;
  // Fractional outcome: redraw from the conditioned marginal.
  return rng.uniform() < marginal_label_prob_from_p(p, cfg.num_experts) ? 1 : 0;
}

namespace {

Matrix sample_gaussian(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

Matrix subset_rows(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(static_cast<int>(idx.size()), m.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<int>(i)) = m.row(idx[i]);
  return out;
}

// Draw values at the pseudo-points from their marginal prior
// N(0, kappa(S,S) + input_noise^2 I), one column per output dimension.
Matrix sample_pseudo_values(const PseudoSet& pseudo, int out_dim, Rng& rng) {
  Matrix g = gram(pseudo.points, pseudo.kernel);
  g.diagonal().array() += pseudo.input_noise * pseudo.input_noise;
  const Matrix l = CholFactor::factor(g).llt().matrixL();
  return l * sample_gaussian(pseudo.count(), out_dim, rng);
}

}  // namespace

std::pair<Dataset, Matrix> sample_dataset(const HyperParams& hp, int n_labeled,
                                          int n_unlabeled, int num_features,
                                          int num_labels, std::uint64_t seed) {
  hp.validate();
  if (n_labeled < 1 || n_unlabeled < 0 || num_features < 1 || num_labels < 1)
    throw InvalidArgumentError("sample_dataset: sizes must be positive");
  const int n = n_labeled + n_unlabeled;
  const int m_c = hp.pseudo_c > 0 ? hp.pseudo_c : choose_num_pseudo(n);
  const int m_z = hp.pseudo_z > 0 ? hp.pseudo_z : m_c;
  if (m_c > n || m_z > n)
    throw InvalidArgumentError("sample_dataset: pseudo count exceeds instance count");

  Rng rng(seed);

  // Features and the feature-space pseudo subset.
  const Matrix x = sample_gaussian(n, num_features, rng);
  const double sigma_c = bandwidth_heuristic(x, seed);
  PseudoSet pseudo_c{subset_rows(x, rng.sample_without_replacement(n, m_c)),
                     KernelConfig{sigma_c}, hp.alpha_c};

  // Latent embedding through the first stochastic layer.
  const Matrix u_c = sample_pseudo_values(pseudo_c, hp.latent_dim, rng);
  SparseGpLayer layer_c{pseudo_c, hp.latent_dim, u_c, Matrix(), hp.beta_c, hp.gamma_c};
  Matrix c = projection(layer_c, x) * u_c;
  c += hp.beta_c * sample_gaussian(n, hp.latent_dim, rng);
  c += hp.gamma_c * sample_gaussian(n, hp.latent_dim, rng);

  // Latent-space pseudo subset and the second layer.
  const double sigma_z = bandwidth_heuristic(c, seed);
  PseudoSet pseudo_z{subset_rows(c, rng.sample_without_replacement(n, m_z)),
                     KernelConfig{sigma_z}, hp.alpha_z};
  const Matrix u_z = sample_pseudo_values(pseudo_z, num_labels, rng);
  SparseGpLayer layer_z{pseudo_z, num_labels, u_z, Matrix(), hp.beta_z, hp.gamma_z};
  Matrix z = projection(layer_z, c) * u_z;
  z += hp.beta_z * sample_gaussian(n, num_labels, rng);
  z += hp.gamma_z * sample_gaussian(n, num_labels, rng);

  // Expert draws for the labeled block.
  Dataset d;
  d.features = x;
  d.n_labeled = n_labeled;
  d.n_unlabeled = n_unlabeled;
  d.num_labels = num_labels;
  d.labels = Matrix::Zero(n_labeled, num_labels);
  for (int i = 0; i < n_labeled; ++i)
    for (int k = 0; k < num_labels; ++k)
      d.labels(i, k) = sample_label(z(i, k), hp.expert_cfg, rng);

  return {std::move(d), std::move(z)};
}

}  // namespace esmc
