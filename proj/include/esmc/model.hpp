#pragma once

#include <cstdint>
#include <utility>

#include "esmc/dataio.hpp"
#include "esmc/experts.hpp"
#include "esmc/rng.hpp"
#include "esmc/types.hpp"

namespace esmc {

/// Every model constant in one place. Kernel bandwidths <= 0 mean
/// "derive from the data with the pairwise-distance rule"; fitted models
/// always carry resolved positive values.
struct HyperParams {
  int latent_dim = 20;          // L
  ExpertConfig expert_cfg;      // B, lambda
  int pseudo_c = 0;             // M_c; 0 = choose_num_pseudo(n)
  int pseudo_z = 0;             // M_z; 0 = same as pseudo_c
  double sigma_c = 0.0;         // <= 0: bandwidth heuristic on features
  double sigma_z = 0.0;         // <= 0: recomputed from the latent pseudo-points
  double alpha_c = 0.1;
  double alpha_z = 0.1;
  double beta_c = 0.1;
  double beta_z = 0.1;
  double gamma_c = 1e-3;
  double gamma_z = 1e-3;
  double z_clamp = 0.0;         // <= 0: defaults to 5 / lambda
  int max_iters = 50;
  double elbo_tol = 1e-5;

  double resolved_clamp() const {
    return z_clamp > 0.0 ? z_clamp : 5.0 / expert_cfg.lambda;
  }
  void validate() const;
};

/// Number of experts from the label matrix: min(floor(#zeros / #ones), 100),
/// never below 1. An all-zero matrix is rejected.
int choose_num_experts(const Matrix& labels);

/// Pseudo-instance count from the training-set size:
///   ceil(0.1 n) for n < 10000, ceil(0.01 n) for n < 20000, else 400.
int choose_num_pseudo(int n);

/// One labeled-cell draw of the expert mechanism at suitability z: all B
/// experts fire -> 1, first expert off -> 0, otherwise the outcome is
/// redrawn from the conditioned marginal.
int sample_label(double z, const ExpertConfig& cfg, Rng& rng);

/// Full generative draw: Gaussian features, pseudo subset, pseudo values
/// from their marginal prior, latent embedding, suitability matrix, and
/// expert-generated labels for the labeled block. Kernel bandwidths come
/// from the pairwise-distance rule applied to the sampled draws. Returns
/// the dataset plus the true suitability matrix.
std::pair<Dataset, Matrix> sample_dataset(const HyperParams& hp, int n_labeled,
                                          int n_unlabeled, int num_features,
                                          int num_labels, std::uint64_t seed);

}  // namespace esmc
