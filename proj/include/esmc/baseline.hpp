#pragma once

#include <string>

#include "esmc/dataio.hpp"
#include "esmc/types.hpp"

namespace esmc {

/// Minimal linear label-embedding comparator: labels are centered and
/// projected onto their top-L principal directions, then a ridge
/// regression maps features to those projections.
struct LinearBaselineModel {
  Matrix projection;  // K x L, orthonormal columns
  Matrix regression;  // F x L
  Vector label_mean;  // K
  double ridge = 1.0;

  void validate() const;
};

LinearBaselineModel fit_linear(const Dataset& data, int latent_dim, double ridge);

/// score(x) = projection * (regression^T x) + label_mean, one row per input.
Matrix score_linear(const LinearBaselineModel& model, const Matrix& features);

/// Same JSON envelope as the main model file, type tag "linear_baseline".
void save_linear(const LinearBaselineModel& model, const std::string& path,
                 const std::string& extra_config = "");
LinearBaselineModel load_linear(const std::string& path);

}  // namespace esmc
