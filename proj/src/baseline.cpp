#include "esmc/baseline.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "esmc/errors.hpp"
#include "esmc/inference.hpp"
#include "esmc/sparse_gp.hpp"

namespace esmc {

using nlohmann::json;

void LinearBaselineModel::validate() const {
  if (!(ridge > 0.0)) throw InvalidArgumentError("baseline: ridge must be positive");
  if (projection.rows() != label_mean.size())
    throw InvalidArgumentError("baseline: projection/label_mean shape mismatch");
  if (projection.cols() != regression.cols())
    throw InvalidArgumentError("baseline: projection/regression latent dims differ");
  const Matrix gram = projection.transpose() * projection;
  const Matrix eye = Matrix::Identity(projection.cols(), projection.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidArgumentError("baseline: projection columns are not orthonormal");
}

LinearBaselineModel fit_linear(const Dataset& data, int latent_dim, double ridge) {
  data.validate();
  if (data.n_labeled < 1) throw InvalidArgumentError("fit_linear: labeled data required");
  if (latent_dim < 1 || latent_dim > std::min<int>(data.num_labels, data.n_labeled))
    throw InvalidArgumentError("fit_linear: latent_dim out of range");
  if (!(ridge > 0.0)) throw InvalidArgumentError("fit_linear: ridge must be positive");

  const LabelPca pca = label_pca(data.labels, latent_dim);
  const Matrix x = data.features.topRows(data.n_labeled);

  Matrix normal = x.transpose() * x;
  normal.diagonal().array() += ridge;
  const Matrix w = chol_solve(normal, x.transpose() * pca.coords);

  LinearBaselineModel m;
  m.projection = pca.basis;
  m.regression = w;
  m.label_mean = pca.label_mean;
  m.ridge = ridge;
  m.validate();
  return m;
}

Matrix score_linear(const LinearBaselineModel& model, const Matrix& features) {
  if (features.cols() != model.regression.rows())
    throw InvalidArgumentError("score_linear: feature dimension mismatch");
  Matrix s = features * model.regression * model.projection.transpose();
  s.rowwise() += model.label_mean.transpose();
  return s;
}

namespace {

json dense_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix dense_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw FormatError(std::string(field) + ": expected a matrix");
  Matrix m(j.size(), j[0].size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw FormatError(std::string(field) + ": ragged rows");
    for (size_t k = 0; k < j[i].size(); ++k) {
      const double v = j[i][k].get<double>();
      if (!std::isfinite(v)) throw FormatError(std::string(field) + ": non-finite value");
      m(i, k) = v;
    }
  }
  return m;
}

}  // namespace

void save_linear(const LinearBaselineModel& model, const std::string& path,
                 const std::string& extra_config) {
  model.validate();
  json j;
  j["format_version"] = 1;
  j["type"] = "linear_baseline";
  j["tool"] = {{"name", "esmc"}, {"version", kVersion}};
  if (!extra_config.empty()) {
    j["config"] = json::parse(extra_config, nullptr, false);
    if (j["config"].is_discarded())
      throw FormatError("config: provenance block is not valid JSON");
  }
  j["ridge"] = model.ridge;
  j["label_mean"] = dense_to_json(model.label_mean.transpose());
  j["projection"] = dense_to_json(model.projection);
  j["regression"] = dense_to_json(model.regression);

  std::ofstream out(path);
  if (!out) throw InvalidArgumentError("cannot open model file for writing: " + path);
  out << j.dump(2) << '\n';
}

LinearBaselineModel load_linear(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open model file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw FormatError("model file: not valid JSON");
  if (!j.contains("format_version") || j["format_version"] != 1)
    throw FormatError("format_version: expected 1");
  if (!j.contains("type") || j["type"] != "linear_baseline")
    throw FormatError("type: expected \"linear_baseline\"");

  LinearBaselineModel m;
  m.ridge = j.at("ridge").get<double>();
  m.label_mean = dense_from_json(j.at("label_mean"), "label_mean").row(0).transpose();
  m.projection = dense_from_json(j.at("projection"), "projection");
  m.regression = dense_from_json(j.at("regression"), "regression");
  m.validate();
  return m;
}

}  // namespace esmc
