#pragma once

#include <string>

#include "esmc/model.hpp"
#include "esmc/sparse_gp.hpp"
#include "esmc/types.hpp"

namespace esmc {

/// Everything needed for prediction: the two fitted layers plus the
/// hyperparameters they were trained with.
struct TrainedModel {
  SparseGpLayer layer_c;  // features -> latent, out_dim = L
  SparseGpLayer layer_z;  // latent -> label suitability, out_dim = K
  HyperParams hp;
  int format_version = 1;

  void validate() const;
};

/// Raw suitability scores: predict_mean(layer_z, predict_mean(layer_c, X)).
/// All evaluation metrics are rank-based, so these are used directly.
Matrix score(const TrainedModel& model, const Matrix& features);

/// Elementwise expert marginal of the raw scores; same per-row ranking.
Matrix score_prob(const TrainedModel& model, const Matrix& features);

/// JSON persistence, format_version 1. Serialization is canonical (sorted
/// keys, shortest round-trip numbers), so save -> load -> save is
/// byte-identical. Covariances travel as lower-triangular factors.
/// `extra_config` (optional JSON text) is embedded for provenance.
void save_model(const TrainedModel& model, const std::string& path,
                const std::string& extra_config = "");
TrainedModel load_model(const std::string& path);

}  // namespace esmc
