#pragma once

#include "esmc/kernel.hpp"
#include "esmc/types.hpp"

namespace esmc {

/// Pseudo-instance set parameterizing one GP layer. `input_noise` is the
/// standard deviation added on the diagonal of the pseudo Gram matrix; it
/// keeps kappa(S,S) + noise^2 I invertible even for coincident points.
struct PseudoSet {
  Matrix points;       // M x D
  KernelConfig kernel;
  double input_noise = 0.1;

  int count() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  void validate() const;
};

/// One fitted stochastic layer: posterior moments of the function values
/// at the pseudo-points plus the observation noise scales. The posterior
/// covariance is shared across output dimensions and stored as a lower
/// Cholesky factor.
struct SparseGpLayer {
  PseudoSet pseudo;
  int out_dim = 0;
  Matrix value_mean;       // M x out_dim
  Matrix cov_chol;         // M x M, lower triangular
  double obs_noise = 0.1;      // beta
  double residual_noise = 1e-3;  // gamma

  double noise_var() const {
    return obs_noise * obs_noise + residual_noise * residual_noise;
  }
};

/// Symmetric positive-definite factorization with escalating diagonal
/// jitter (0, 1e-10, 1e-9, ..., 1e-6). Throws NumericalError, naming the
/// final jitter, if the matrix stays indefinite.
class CholFactor {
 public:
  static CholFactor factor(const Matrix& m);

  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }
  Matrix inverse() const;
  double log_det() const;
  double jitter_used() const { return jitter_; }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }

 private:
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

/// Solve matrix * X = rhs for symmetric PSD input, with jitter escalation.
Matrix chol_solve(const Matrix& matrix, const Matrix& rhs);

/// (kappa(S,S) + input_noise^2 I)^{-1}, symmetric.
Matrix prior_precision(const PseudoSet& pseudo);

/// Projection A = kappa(inputs, S) (kappa(S,S) + input_noise^2 I)^{-1}.
/// Row i times value_mean is the layer's conditional mean at inputs[i].
Matrix projection(const SparseGpLayer& layer, const Matrix& inputs);

/// projection(layer, inputs) * value_mean: the posterior mean function.
Matrix predict_mean(const SparseGpLayer& layer, const Matrix& inputs);

}  // namespace esmc
