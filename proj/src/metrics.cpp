#include "esmc/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "esmc/errors.hpp"

namespace esmc {

namespace {

void check_shapes(const Matrix& scores, const Matrix& truth) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols())
    throw InvalidArgumentError("metrics: score/truth shape mismatch");
  if (scores.rows() == 0 || scores.cols() == 0)
    throw InvalidArgumentError("metrics: empty inputs");
}

// Pairwise AUC of one score/relevance sequence via average ranks.
// Returns -1 when the sequence lacks one of the two classes.
double sequence_auc(const double* scores, const double* rel, int len, int stride) {
  int pos = 0;
  for (int j = 0; j < len; ++j)
    if (rel[j * stride] == 1.0) ++pos;
  const int neg = len - pos;
  if (pos == 0 || neg == 0) return -1.0;

  std::vector<int> order(len);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a * stride] < scores[b * stride];
  });

  double rank_sum_pos = 0.0;
  int i = 0;
  while (i < len) {
    int j = i;
    while (j < len && scores[order[j] * stride] == scores[order[i] * stride]) ++j;
    // ranks i+1 .. j share the average rank
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (int t = i; t < j; ++t)
      if (rel[order[t] * stride] == 1.0) rank_sum_pos += avg_rank;
    i = j;
  }
  const double numer = rank_sum_pos - 0.5 * static_cast<double>(pos) * (pos + 1);
  return numer / (static_cast<double>(pos) * static_cast<double>(neg));
}

double reduce_eligible(const std::vector<double>& vals, const char* what) {
  double sum = 0.0;
  int count = 0;
  for (double v : vals) {
    if (v >= 0.0) {
      sum += v;
      ++count;
    }
  }
  if (count == 0) throw DegenerateInputError(std::string(what) + ": no eligible rows");
  return sum / static_cast<double>(count);
}

double instance_coverage(const Matrix& scores, const Matrix& truth, int i) {
  const int k = static_cast<int>(scores.cols());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores(i, a) != scores(i, b)) return scores(i, a) > scores(i, b);
    return a < b;
  });
  int deepest = 0;
  for (int r = 0; r < k; ++r)
    if (truth(i, order[r]) == 1.0) deepest = r + 1;
  return deepest > 0 ? static_cast<double>(deepest - 1) : 0.0;
}

double instance_precision(const Matrix& scores, const Matrix& truth, int i, int k) {
  const int cols = static_cast<int>(scores.cols());
  std::vector<int> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    if (scores(i, a) != scores(i, b)) return scores(i, a) > scores(i, b);
    return a < b;
  });
  int hits = 0;
  for (int r = 0; r < k; ++r)
    if (truth(i, order[r]) == 1.0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace

double auc_serial(const Matrix& scores, const Matrix& truth, bool macro) {
  check_shapes(scores, truth);
  if (macro) {
    const int k = static_cast<int>(scores.cols());
    const int n = static_cast<int>(scores.rows());
    std::vector<double> per_label(k);
    for (int j = 0; j < k; ++j)
      per_label[j] = sequence_auc(scores.data() + j * n, truth.data() + j * n, n, 1);
    return reduce_eligible(per_label, "auc");
  }
  const int n = static_cast<int>(scores.rows());
  const int k = static_cast<int>(scores.cols());
  std::vector<double> per_instance(n);
  for (int i = 0; i < n; ++i)
    per_instance[i] = sequence_auc(scores.data() + i, truth.data() + i, k, static_cast<int>(n));
  return reduce_eligible(per_instance, "auc");
}

double auc(const Matrix& scores, const Matrix& truth, bool macro) {
  check_shapes(scores, truth);
  if (macro) {
    const int k = static_cast<int>(scores.cols());
    const int n = static_cast<int>(scores.rows());
    std::vector<double> per_label(k);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < k; ++j)
      per_label[j] = sequence_auc(scores.data() + j * n, truth.data() + j * n, n, 1);
    return reduce_eligible(per_label, "auc");
  }
  const int n = static_cast<int>(scores.rows());
  const int k = static_cast<int>(scores.cols());
  std::vector<double> per_instance(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    per_instance[i] = sequence_auc(scores.data() + i, truth.data() + i, k, static_cast<int>(n));
  return reduce_eligible(per_instance, "auc");
}

double coverage_serial(const Matrix& scores, const Matrix& truth) {
  check_shapes(scores, truth);
  const int n = static_cast<int>(scores.rows());
  std::vector<double> per_instance(n);
  for (int i = 0; i < n; ++i) per_instance[i] = instance_coverage(scores, truth, i);
  double sum = 0.0;
  for (double v : per_instance) sum += v;
  return sum / static_cast<double>(n);
}

double coverage(const Matrix& scores, const Matrix& truth) {
  check_shapes(scores, truth);
  const int n = static_cast<int>(scores.rows());
  std::vector<double> per_instance(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) per_instance[i] = instance_coverage(scores, truth, i);
  double sum = 0.0;
  for (double v : per_instance) sum += v;
  return sum / static_cast<double>(n);
}

double precision_at_k_serial(const Matrix& scores, const Matrix& truth, int k) {
  check_shapes(scores, truth);
  if (k < 1 || k > scores.cols())
    throw InvalidArgumentError("precision_at_k: k out of range");
  const int n = static_cast<int>(scores.rows());
  std::vector<double> per_instance(n);
  for (int i = 0; i < n; ++i) per_instance[i] = instance_precision(scores, truth, i, k);
  double sum = 0.0;
  for (double v : per_instance) sum += v;
  return sum / static_cast<double>(n);
}

double precision_at_k(const Matrix& scores, const Matrix& truth, int k) {
  check_shapes(scores, truth);
  if (k < 1 || k > scores.cols())
    throw InvalidArgumentError("precision_at_k: k out of range");
  const int n = static_cast<int>(scores.rows());
  std::vector<double> per_instance(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) per_instance[i] = instance_precision(scores, truth, i, k);
  double sum = 0.0;
  for (double v : per_instance) sum += v;
  return sum / static_cast<double>(n);
}

double micro_f1_max(const Matrix& scores, const Matrix& truth) {
  check_shapes(scores, truth);
  const long long cells = static_cast<long long>(scores.rows()) * scores.cols();
  std::vector<std::pair<double, char>> flat;
  flat.reserve(cells);
  long long total_pos = 0;
  for (int i = 0; i < scores.rows(); ++i)
    for (int j = 0; j < scores.cols(); ++j) {
      const char pos = truth(i, j) == 1.0 ? 1 : 0;
      total_pos += pos;
      flat.emplace_back(scores(i, j), pos);
    }
  if (total_pos == 0)
    throw DegenerateInputError("micro_f1_max: no relevant labels at all");

  std::sort(flat.begin(), flat.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  double best = 0.0;
  long long tp = 0, predicted = 0;
  size_t i = 0;
  while (i < flat.size()) {
    size_t j = i;
    // All cells sharing this score cross the threshold together.
    while (j < flat.size() && flat[j].first == flat[i].first) {
      tp += flat[j].second;
      ++predicted;
      ++j;
    }
    const long long fp = predicted - tp;
    const long long fn = total_pos - tp;
    const double f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    if (f1 > best) best = f1;
    i = j;
  }
  return best;
}

}  // namespace esmc
