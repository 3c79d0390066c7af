#include "esmc/kernel.hpp"

#include <cmath>
#include <vector>

#include "esmc/errors.hpp"
#include "esmc/rng.hpp"

namespace esmc {

void KernelConfig::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw InvalidArgumentError("kernel bandwidth must be positive and finite");
}

namespace {

inline double rbf_from_sqdist(double sqdist, double inv_two_bw2) {
  return std::exp(-sqdist * inv_two_bw2);
}

inline double sqdist_rows(const Matrix& a, int i, const Matrix& b, int j) {
  double s = 0.0;
  for (int d = 0; d < a.cols(); ++d) {
    const double diff = a(i, d) - b(j, d);
    s += diff * diff;
  }
  return s;
}

}  // namespace

double rbf(const Vector& a, const Vector& b, const KernelConfig& cfg) {
  cfg.validate();
  if (a.size() != b.size())
    throw InvalidArgumentError("rbf: vectors have different lengths");
  double s = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return rbf_from_sqdist(s, 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth));
}

Matrix gram_serial(const Matrix& points, const KernelConfig& cfg) {
  cfg.validate();
  if (points.rows() == 0) throw InvalidArgumentError("gram: empty point set");
  const int n = static_cast<int>(points.rows());
  const double inv = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j)
      g(i, j) = rbf_from_sqdist(sqdist_rows(points, i, points, j), inv);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

Matrix gram(const Matrix& points, const KernelConfig& cfg) {
  cfg.validate();
  if (points.rows() == 0) throw InvalidArgumentError("gram: empty point set");
  const int n = static_cast<int>(points.rows());
  const double inv = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  Matrix g(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j)
      g(i, j) = rbf_from_sqdist(sqdist_rows(points, i, points, j), inv);
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

Matrix cross_gram_serial(const Matrix& rows, const Matrix& cols, const KernelConfig& cfg) {
  cfg.validate();
  if (rows.rows() > 0 && cols.rows() > 0 && rows.cols() != cols.cols())
    throw InvalidArgumentError("cross_gram: row/col point dimensions differ");
  const int nr = static_cast<int>(rows.rows());
  const int nc = static_cast<int>(cols.rows());
  const double inv = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  Matrix g(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      g(i, j) = rbf_from_sqdist(sqdist_rows(rows, i, cols, j), inv);
  return g;
}

Matrix cross_gram(const Matrix& rows, const Matrix& cols, const KernelConfig& cfg) {
  cfg.validate();
  if (rows.rows() > 0 && cols.rows() > 0 && rows.cols() != cols.cols())
    throw InvalidArgumentError("cross_gram: row/col point dimensions differ");
  const int nr = static_cast<int>(rows.rows());
  const int nc = static_cast<int>(cols.rows());
  const double inv = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  Matrix g(nr, nc);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      g(i, j) = rbf_from_sqdist(sqdist_rows(rows, i, cols, j), inv);
  return g;
}

namespace {

// Row i contributes the sum of distances to rows j > i. Partials are
// combined in index order afterwards, keeping the total independent of
// the thread partitioning.
double reduce_pair_partials(const std::vector<double>& partials, long long pairs) {
  double total = 0.0;
  for (double p : partials) total += p;
  return total / static_cast<double>(pairs);
}

}  // namespace

double mean_pairwise_distance_serial(const Matrix& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw DegenerateInputError("mean_pairwise_distance: need at least two points");
  std::vector<double> partials(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = i + 1; j < n; ++j) s += std::sqrt(sqdist_rows(points, i, points, j));
    partials[i] = s;
  }
  return reduce_pair_partials(partials, static_cast<long long>(n) * (n - 1) / 2);
}

double mean_pairwise_distance(const Matrix& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw DegenerateInputError("mean_pairwise_distance: need at least two points");
  std::vector<double> partials(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = i + 1; j < n; ++j) s += std::sqrt(sqdist_rows(points, i, points, j));
    partials[i] = s;
  }
  return reduce_pair_partials(partials, static_cast<long long>(n) * (n - 1) / 2);
}

double bandwidth_heuristic(const Matrix& points, std::uint64_t seed, int subsample_cap) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw DegenerateInputError("bandwidth_heuristic: need at least two points");
  double mean;
  if (n > subsample_cap) {
    Rng rng(seed);
    const std::vector<int> idx = rng.sample_without_replacement(n, subsample_cap);
    Matrix sub(subsample_cap, points.cols());
    for (int i = 0; i < subsample_cap; ++i) sub.row(i) = points.row(idx[i]);
    mean = mean_pairwise_distance(sub);
  } else {
    mean = mean_pairwise_distance(points);
  }
  if (mean <= 0.0)
    throw DegenerateInputError("bandwidth_heuristic: all points identical");
  return 2.0 * mean;
}

}  // namespace esmc
