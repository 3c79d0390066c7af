#pragma once

#include <map>

#include "esmc/types.hpp"

namespace esmc {

/// Bundle of ranking-metric values for one score/truth pair.
struct EvalReport {
  double auc = 0.0;
  bool auc_macro = false;  // which averaging produced `auc`
  double coverage = 0.0;
  std::map<int, double> precision_at;
  double micro_f1_max = 0.0;
  int n_evaluated = 0;
};

/// Pairwise AUC. Instance-averaged by default: per instance with at least
/// one relevant and one irrelevant label, the fraction of
/// (relevant, irrelevant) pairs ranked correctly, ties counting 0.5.
/// macro = true averages per label over instances instead. Instances
/// (or labels) without both classes are skipped; none eligible is an
/// error.
double auc(const Matrix& scores, const Matrix& truth, bool macro = false);
double auc_serial(const Matrix& scores, const Matrix& truth, bool macro = false);

/// Mean over instances of (highest rank of any relevant label) - 1, with
/// ranks by descending score and ties broken by ascending label index.
/// Instances without relevant labels contribute 0. Lower is better.
double coverage(const Matrix& scores, const Matrix& truth);
double coverage_serial(const Matrix& scores, const Matrix& truth);

/// Mean over instances of |top-k by score intersected with relevant| / k.
double precision_at_k(const Matrix& scores, const Matrix& truth, int k);
double precision_at_k_serial(const Matrix& scores, const Matrix& truth, int k);

/// Best micro-averaged F1 over global thresholds taken from the distinct
/// score values (prediction = score >= threshold).
double micro_f1_max(const Matrix& scores, const Matrix& truth);

}  // namespace esmc
