#pragma once

#include <cstdint>

#include "esmc/types.hpp"

namespace esmc {

/// Radial-basis-function kernel settings. The bandwidth plays the role of
/// the smoothing parameter and shares units with input-space distance.
struct KernelConfig {
  double bandwidth = 1.0;

  void validate() const;
};

/// kappa(a, b) = exp(-||a - b||^2 / (2 * bandwidth^2)), in (0, 1].
double rbf(const Vector& a, const Vector& b, const KernelConfig& cfg);

/// Gram matrix over the rows of `points`: symmetric, unit diagonal, PSD up
/// to rounding. The parallel version partitions rows; results are
/// bit-identical to the serial reference.
Matrix gram(const Matrix& points, const KernelConfig& cfg);
Matrix gram_serial(const Matrix& points, const KernelConfig& cfg);

/// Rectangular kernel matrix: entry (i, j) = rbf(rows.row(i), cols.row(j)).
Matrix cross_gram(const Matrix& rows, const Matrix& cols, const KernelConfig& cfg);
Matrix cross_gram_serial(const Matrix& rows, const Matrix& cols, const KernelConfig& cfg);

/// Mean Euclidean distance over all unordered row pairs.
/// Both versions accumulate per-row partial sums and reduce them in index
/// order, so they agree bit-for-bit.
double mean_pairwise_distance(const Matrix& points);
double mean_pairwise_distance_serial(const Matrix& points);

/// Bandwidth rule: twice the mean pairwise Euclidean distance. Sets with
/// more than `subsample_cap` rows are reduced to a seeded subsample first
/// so the quadratic pair scan stays bounded.
double bandwidth_heuristic(const Matrix& points, std::uint64_t seed = 0,
                           int subsample_cap = 2000);

}  // namespace esmc
