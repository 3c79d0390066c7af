#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "esmc/types.hpp"

namespace esmc {

/// Feature matrix plus an optional binary label block. Labeled rows come
/// first; `labels` has exactly `n_labeled` rows. `num_labels` is kept
/// separately so fully unlabeled datasets still know the label-space size.
struct Dataset {
  Matrix features;   // n x F
  Matrix labels;     // n_labeled x K, entries 0/1
  int n_labeled = 0;
  int n_unlabeled = 0;
  int num_labels = 0;  // K

  int n() const { return n_labeled + n_unlabeled; }
  int num_features() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

/// Parse the sparse text format:
///   header line "n F K", then n lines of
///   "l1,l2,...  f1:v1 f2:v2 ..." with 0-based indices.
/// A line starting with a space carries an empty label list. Every parsed
/// row is treated as labeled.
Dataset parse_sparse(const std::string& path);

/// Inverse of parse_sparse. Rows past n_labeled are written with empty
/// label lists. Feature values use 17 significant digits, so numeric
/// round-trips are bit-exact.
void write_sparse(const Dataset& data, const std::string& path);

/// Missing-label simulator: flips floor(rate * #ones) one-entries to zero,
/// chosen uniformly without replacement. Returns the corrupted dataset and
/// the removed (instance, label) pairs in row-major order.
struct DropLabelsResult {
  Dataset data;
  std::vector<std::pair<int, int>> removed;
};
DropLabelsResult drop_labels(const Dataset& data, double rate, std::uint64_t seed);

/// Semi-supervised simulator: keeps a seeded uniform ceil(keep_fraction*n)
/// subset as labeled and moves the rest to the unlabeled block (features
/// retained, label rows dropped). Relative row order is preserved within
/// each block.
Dataset drop_instances(const Dataset& data, double keep_fraction, std::uint64_t seed);

}  // namespace esmc
