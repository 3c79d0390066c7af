#include "esmc/sparse_gp.hpp"

#include <cmath>
#include <sstream>

#include "esmc/errors.hpp"

namespace esmc {

void PseudoSet::validate() const {
  if (points.rows() < 1) throw InvalidArgumentError("pseudo set must be nonempty");
  kernel.validate();
  if (!(input_noise > 0.0) || !std::isfinite(input_noise))
    throw InvalidArgumentError("pseudo input_noise must be positive and finite");
}

CholFactor CholFactor::factor(const Matrix& m) {
  if (m.rows() != m.cols())
    throw InvalidArgumentError("CholFactor: matrix must be square");
  static const double kJitters[] = {0.0,  1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  CholFactor f;
  for (double j : kJitters) {
    Matrix shifted = m;
    if (j > 0.0) shifted.diagonal().array() += j;
    f.llt_.compute(shifted);
    if (f.llt_.info() == Eigen::Success) {
      f.jitter_ = j;
      return f;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky factorization failed; still indefinite at jitter 1e-06";
  throw NumericalError(msg.str());
}

Matrix CholFactor::inverse() const {
  const Eigen::Index n = llt_.matrixL().rows();
  return llt_.solve(Matrix::Identity(n, n));
}

double CholFactor::log_det() const {
  const Matrix l = llt_.matrixL();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

Matrix chol_solve(const Matrix& matrix, const Matrix& rhs) {
  if (matrix.rows() != rhs.rows())
    throw InvalidArgumentError("chol_solve: rhs row count mismatch");
  return CholFactor::factor(matrix).solve(rhs);
}

namespace {

Matrix regularized_gram(const PseudoSet& pseudo) {
  Matrix g = gram(pseudo.points, pseudo.kernel);
  g.diagonal().array() += pseudo.input_noise * pseudo.input_noise;
  return g;
}

}  // namespace

Matrix prior_precision(const PseudoSet& pseudo) {
  pseudo.validate();
  Matrix inv = CholFactor::factor(regularized_gram(pseudo)).inverse();
  // Symmetrize away the solve's rounding skew.
  return 0.5 * (inv + inv.transpose());
}

Matrix projection(const SparseGpLayer& layer, const Matrix& inputs) {
  layer.pseudo.validate();
  if (inputs.rows() > 0 && inputs.cols() != layer.pseudo.dim())
    throw InvalidArgumentError("projection: input dimension does not match pseudo-points");
  const Matrix kxs = cross_gram(inputs, layer.pseudo.points, layer.pseudo.kernel);
  const CholFactor f = CholFactor::factor(regularized_gram(layer.pseudo));
  return f.solve(kxs.transpose()).transpose();
}

Matrix predict_mean(const SparseGpLayer& layer, const Matrix& inputs) {
  if (layer.value_mean.rows() != layer.pseudo.count())
    throw InvalidArgumentError("predict_mean: value_mean rows must equal pseudo count");
  return projection(layer, inputs) * layer.value_mean;
}

}  // namespace esmc
