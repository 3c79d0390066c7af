#include "esmc/dataio.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "esmc/errors.hpp"
#include "esmc/rng.hpp"

namespace esmc {

void Dataset::validate() const {
  if (n_labeled < 0 || n_unlabeled < 0)
    throw InvalidArgumentError("Dataset: negative instance counts");
  if (features.rows() != n())
    throw InvalidArgumentError("Dataset: feature rows do not match instance count");
  if (!features.allFinite())
    throw InvalidArgumentError("Dataset: non-finite feature value");
  if (n_labeled > 0) {
    if (labels.rows() != n_labeled || labels.cols() != num_labels)
      throw InvalidArgumentError("Dataset: label block shape mismatch");
    for (int i = 0; i < labels.rows(); ++i)
      for (int k = 0; k < labels.cols(); ++k)
        if (labels(i, k) != 0.0 && labels(i, k) != 1.0)
          throw InvalidArgumentError("Dataset: labels must be strictly binary");
  }
}

namespace {

long parse_index(const std::string& tok, long line_no, const char* what) {
  try {
    size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("invalid ") + what + " '" + tok + "'", line_no);
  }
}

double parse_value(const std::string& tok, long line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("non-numeric feature value '" + tok + "'", line_no);
  }
}

}  // namespace

Dataset parse_sparse(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open dataset file: " + path);

  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  ++line_no;
  long n = 0, f = 0, k = 0;
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> n >> f >> k) || (hs >> extra) || n < 0 || f <= 0 || k < 0)
      throw ParseError("malformed header, expected 'n F K'", 1);
  }

  Dataset d;
  d.features = Matrix::Zero(n, f);
  d.labels = Matrix::Zero(n, k);
  d.n_labeled = static_cast<int>(n);
  d.n_unlabeled = 0;
  d.num_labels = static_cast<int>(k);

  for (long i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw ParseError("unexpected end of file, expected " + std::to_string(n) + " rows",
                       line_no + 1);
    ++line_no;

    std::string label_part;
    std::string feature_part;
    if (!line.empty() && line[0] == ' ') {
      feature_part = line.substr(1);
    } else {
      const size_t sp = line.find(' ');
      label_part = line.substr(0, sp);
      if (sp != std::string::npos) feature_part = line.substr(sp + 1);
    }

    if (!label_part.empty()) {
      std::set<long> seen;
      std::istringstream ls(label_part);
      std::string tok;
      while (std::getline(ls, tok, ',')) {
        const long idx = parse_index(tok, line_no, "label index");
        if (idx < 0 || idx >= k)
          throw ParseError("label index " + std::to_string(idx) + " out of range", line_no);
        if (!seen.insert(idx).second)
          throw ParseError("duplicate label index " + std::to_string(idx), line_no);
        d.labels(i, idx) = 1.0;
      }
      if (label_part.back() == ',')
        throw ParseError("trailing comma in label list", line_no);
    }

    std::set<long> seen_feats;
    std::istringstream fs(feature_part);
    std::string tok;
    while (fs >> tok) {
      const size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("expected 'index:value', got '" + tok + "'", line_no);
      const long idx = parse_index(tok.substr(0, colon), line_no, "feature index");
      if (idx < 0 || idx >= f)
        throw ParseError("feature index " + std::to_string(idx) + " out of range", line_no);
      if (!seen_feats.insert(idx).second)
        throw ParseError("duplicate feature index " + std::to_string(idx), line_no);
      d.features(i, idx) = parse_value(tok.substr(colon + 1), line_no);
    }
  }

  d.validate();
  return d;
}

void write_sparse(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw InvalidArgumentError("cannot open output file: " + path);

  out << data.n() << ' ' << data.num_features() << ' ' << data.num_labels << '\n';
  char buf[64];
  for (int i = 0; i < data.n(); ++i) {
    std::string line;
    if (i < data.n_labeled) {
      bool first = true;
      for (int k = 0; k < data.num_labels; ++k) {
        if (data.labels(i, k) == 1.0) {
          if (!first) line += ',';
          line += std::to_string(k);
          first = false;
        }
      }
    }
    for (int j = 0; j < data.num_features(); ++j) {
      const double v = data.features(i, j);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      line += ' ';
      line += std::to_string(j);
      line += ':';
      line += buf;
    }
    // An empty label list is flagged by a leading space; a row with no
    // features and no labels becomes a single space.
    if (i >= data.n_labeled || (data.n_labeled > 0 && data.labels.row(i).sum() == 0.0)) {
      if (line.empty() || line[0] != ' ') line = " " + line;
    }
    out << line << '\n';
  }
  if (!out) throw InvalidArgumentError("failed writing dataset file: " + path);
}

DropLabelsResult drop_labels(const Dataset& data, double rate, std::uint64_t seed) {
  data.validate();
  if (data.n_labeled == 0) throw InvalidArgumentError("drop_labels: no labels present");
  if (!(rate >= 0.0 && rate < 1.0))
    throw InvalidArgumentError("drop_labels: rate must lie in [0, 1)");

  std::vector<std::pair<int, int>> ones;
  for (int i = 0; i < data.labels.rows(); ++i)
    for (int k = 0; k < data.labels.cols(); ++k)
      if (data.labels(i, k) == 1.0) ones.emplace_back(i, k);

  const int remove_count = static_cast<int>(std::floor(rate * static_cast<double>(ones.size())));
  Rng rng(seed);
  const std::vector<int> chosen =
      rng.sample_without_replacement(static_cast<int>(ones.size()), remove_count);

  DropLabelsResult res;
  res.data = data;
  res.removed.reserve(chosen.size());
  for (int c : chosen) {
    res.data.labels(ones[c].first, ones[c].second) = 0.0;
    res.removed.push_back(ones[c]);
  }
  return res;
}

Dataset drop_instances(const Dataset& data, double keep_fraction, std::uint64_t seed) {
  data.validate();
  if (data.n_labeled == 0) throw InvalidArgumentError("drop_instances: no labels present");
  if (data.n_unlabeled != 0)
    throw InvalidArgumentError("drop_instances: input must be fully labeled");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw InvalidArgumentError("drop_instances: keep_fraction must lie in (0, 1]");

  const int n = data.n();
  const int keep = static_cast<int>(std::ceil(keep_fraction * n));
  if (keep < 1) throw InvalidArgumentError("drop_instances: zero labeled instances kept");

  Rng rng(seed);
  const std::vector<int> kept = rng.sample_without_replacement(n, keep);
  std::vector<char> is_kept(n, 0);
  for (int i : kept) is_kept[i] = 1;

  Dataset out;
  out.n_labeled = keep;
  out.n_unlabeled = n - keep;
  out.num_labels = data.num_labels;
  out.features = Matrix(n, data.num_features());
  out.labels = Matrix(keep, data.num_labels);

  int row = 0;
  for (int i = 0; i < n; ++i) {
    if (!is_kept[i]) continue;
    out.features.row(row) = data.features.row(i);
    out.labels.row(row) = data.labels.row(i);
    ++row;
  }
  for (int i = 0; i < n; ++i) {
    if (is_kept[i]) continue;
    out.features.row(row) = data.features.row(i);
    ++row;
  }
  return out;
}

}  // namespace esmc
