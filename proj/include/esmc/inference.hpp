#pragma once

#include <cstdint>
#include <vector>

#include "esmc/dataio.hpp"
#include "esmc/model.hpp"
#include "esmc/predict.hpp"
#include "esmc/sparse_gp.hpp"
#include "esmc/types.hpp"

namespace esmc {

/// Rule for the per-cell bound parameter. kCorrected folds the q(z)
/// variance into the optimum (exact coordinate maximizer); kPaper ignores
/// it and uses lambda * |z_mean|.
enum class XiRule { kCorrected, kPaper };

/// Which stochastic layer a pseudo-value update targets.
enum class GpSide { kFeature, kLatent };

struct TrainConfig {
  HyperParams hp;
  std::uint64_t seed = 0;
  XiRule xi_rule = XiRule::kCorrected;
  double c_step = 0.5;     // initial step for the embedding updates
  int c_backtracks = 20;   // halvings before a row is left unchanged
  bool propagate = true;   // feed the latent pseudo-points from the c-layer each sweep
  bool verbose = false;    // stream per-sweep progress records to stderr
};

/// All variational factors for one training run. z_var stays positive
/// everywhere; responsibilities live in [0, 1]; labeled positive cells
/// keep z_mean at or above the clamp after every sweep.
struct VariationalState {
  Matrix c_mean;             // (N+I) x L embedding means (point-mass factor)
  Matrix z_mean;             // (N+I) x K suitability means
  Matrix z_var;              // (N+I) x K suitability variances
  SparseGpLayer layer_c;     // q(U_c) moments + feature-side pseudo set
  SparseGpLayer layer_z;     // q(U_z) moments + latent-side pseudo set
  Matrix resp_rest;          // N x K responsibility of experts 2..B
  Matrix xi;                 // N x K bound parameters, nonnegative
  std::vector<double> elbo_trace;
  HyperParams hp;            // resolved constants for this run
  bool sigma_z_auto = true;  // recompute the latent bandwidth on propagation
};

/// Principal projection of a centered binary label matrix.
struct LabelPca {
  Matrix coords;      // n x L
  Matrix basis;       // K x L, orthonormal columns, sign-canonicalized
  Vector label_mean;  // K
};
LabelPca label_pca(const Matrix& labels, int latent_dim);

/// Deterministic initialization: seeded pseudo subset, label-PCA embedding
/// for labeled rows, clamp/-1/0 suitability means, prior-matching layer
/// covariances, and latent pseudo-points from one propagation pass.
VariationalState init_state(const Dataset& data, const TrainConfig& cfg);

/// Expert responsibilities from the current suitability means.
void update_responsibilities(VariationalState& state, const Dataset& data);

/// Bound parameters for every labeled cell.
void update_xi_all(VariationalState& state, const Dataset& data, XiRule rule);

/// Per-cell Gaussian update of q(Z) under the bound, then the positive-cell
/// clamp. Cells are independent; the parallel version matches the serial
/// reference bit-for-bit.
void update_q_z(VariationalState& state, const Dataset& data);
void update_q_z_serial(VariationalState& state, const Dataset& data);

/// Conjugate update of one layer's pseudo-value factor: shared covariance
/// (prior_precision + A^T A / v)^{-1}, per-output means from the projected
/// targets.
void update_q_u(VariationalState& state, const Dataset& data, GpSide side);

/// Backtracking gradient ascent on each embedding row's local objective.
/// A row moves only if its objective does not decrease.
void update_q_c(VariationalState& state, const Dataset& data, const TrainConfig& cfg);

/// Latent pseudo-points from the c-layer posterior mean at the feature
/// pseudo-points; refreshes the latent bandwidth unless it was fixed.
void propagate_pseudo(VariationalState& state);

/// The bounded evidence lower bound for the current state. Pure function
/// of the state fields; recomputes projections from scratch.
double elbo(const VariationalState& state, const Dataset& data);

/// Local objective and analytic gradient for one embedding row, exposed
/// for finite-difference checks.
double c_row_objective(const VariationalState& state, const Dataset& data, int row,
                       const Vector& c);
Vector c_row_gradient(const VariationalState& state, const Dataset& data, int row,
                      const Vector& c);

struct TrainResult {
  TrainedModel model;
  std::vector<double> trace;
};

/// Full training loop: init, then sweeps of
/// responsibilities -> xi -> q(Z) -> q(U_z) -> q(C) -> propagation -> q(U_c)
/// until the relative ELBO change drops below elbo_tol or max_iters.
TrainResult train(const Dataset& data, const TrainConfig& cfg);

}  // namespace esmc
