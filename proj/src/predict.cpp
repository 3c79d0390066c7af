#include "esmc/predict.hpp"

#include <fstream>

#include <json.hpp>

#include "esmc/errors.hpp"

namespace esmc {

using nlohmann::json;

void TrainedModel::validate() const {
  if (format_version != 1)
    throw FormatError("format_version: expected 1, got " + std::to_string(format_version));
  layer_c.pseudo.validate();
  layer_z.pseudo.validate();
  hp.validate();
  if (layer_c.out_dim != hp.latent_dim)
    throw FormatError("layer_c.out_dim: must equal latent_dim");
  if (layer_z.pseudo.dim() != hp.latent_dim)
    throw FormatError("layer_z.pseudo_points: dimension must equal latent_dim");
  if (layer_c.value_mean.rows() != layer_c.pseudo.count() ||
      layer_c.value_mean.cols() != layer_c.out_dim)
    throw FormatError("layer_c.value_mean: shape mismatch");
  if (layer_z.value_mean.rows() != layer_z.pseudo.count() ||
      layer_z.value_mean.cols() != layer_z.out_dim)
    throw FormatError("layer_z.value_mean: shape mismatch");
}

Matrix score(const TrainedModel& model, const Matrix& features) {
  if (features.cols() != model.layer_c.pseudo.dim())
    throw InvalidArgumentError(
        "score: expected " + std::to_string(model.layer_c.pseudo.dim()) +
        " features, got " + std::to_string(features.cols()));
  return predict_mean(model.layer_z, predict_mean(model.layer_c, features));
}

Matrix score_prob(const TrainedModel& model, const Matrix& features) {
  Matrix z = score(model, features);
  for (int i = 0; i < z.rows(); ++i)
    for (int k = 0; k < z.cols(); ++k)
      z(i, k) = marginal_label_prob(z(i, k), model.hp.expert_cfg);
  return z;
}

namespace {

json matrix_to_json(const Matrix& m, const char* field) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j)))
        throw FormatError(std::string(field) + ": non-finite value");
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw FormatError(std::string(field) + ": expected an array");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  Matrix m;
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array()) throw FormatError(std::string(field) + ": expected row arrays");
    if (cols < 0) {
      cols = static_cast<int>(j[i].size());
      m.resize(rows, cols);
    }
    if (static_cast<int>(j[i].size()) != cols)
      throw FormatError(std::string(field) + ": ragged rows");
    for (int k = 0; k < cols; ++k) {
      if (!j[i][k].is_number())
        throw FormatError(std::string(field) + ": non-numeric entry");
      const double v = j[i][k].get<double>();
      if (!std::isfinite(v)) throw FormatError(std::string(field) + ": non-finite value");
      m(i, k) = v;
    }
  }
  if (rows == 0) throw FormatError(std::string(field) + ": empty matrix");
  return m;
}

json layer_to_json(const SparseGpLayer& layer, const char* name) {
  const std::string f(name);
  json j;
  j["pseudo_points"] = matrix_to_json(layer.pseudo.points, (f + ".pseudo_points").c_str());
  j["bandwidth"] = layer.pseudo.kernel.bandwidth;
  j["input_noise"] = layer.pseudo.input_noise;
  j["obs_noise"] = layer.obs_noise;
  j["residual_noise"] = layer.residual_noise;
  j["out_dim"] = layer.out_dim;
  j["value_mean"] = matrix_to_json(layer.value_mean, (f + ".value_mean").c_str());
  j["cov_chol"] = matrix_to_json(layer.cov_chol, (f + ".cov_chol").c_str());
  return j;
}

double number_field(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number())
    throw FormatError(std::string(field) + ": missing or non-numeric");
  const double v = j[field].get<double>();
  if (!std::isfinite(v)) throw FormatError(std::string(field) + ": non-finite value");
  return v;
}

SparseGpLayer layer_from_json(const json& j, const char* name) {
  const std::string f(name);
  SparseGpLayer layer;
  layer.pseudo.points = matrix_from_json(j.at("pseudo_points"), (f + ".pseudo_points").c_str());
  layer.pseudo.kernel.bandwidth = number_field(j, "bandwidth");
  layer.pseudo.input_noise = number_field(j, "input_noise");
  layer.obs_noise = number_field(j, "obs_noise");
  layer.residual_noise = number_field(j, "residual_noise");
  layer.out_dim = static_cast<int>(number_field(j, "out_dim"));
  layer.value_mean = matrix_from_json(j.at("value_mean"), (f + ".value_mean").c_str());
  layer.cov_chol = matrix_from_json(j.at("cov_chol"), (f + ".cov_chol").c_str());
  if (layer.cov_chol.rows() != layer.pseudo.count() ||
      layer.cov_chol.cols() != layer.pseudo.count())
    throw FormatError(f + ".cov_chol: shape mismatch");
  for (int i = 0; i < layer.cov_chol.rows(); ++i)
    for (int k = i + 1; k < layer.cov_chol.cols(); ++k)
      if (layer.cov_chol(i, k) != 0.0)
        throw FormatError(f + ".cov_chol: not lower triangular");
  return layer;
}

json hp_to_json(const HyperParams& hp) {
  json j;
  j["latent_dim"] = hp.latent_dim;
  j["num_experts"] = hp.expert_cfg.num_experts;
  j["lambda"] = hp.expert_cfg.lambda;
  j["pseudo_c"] = hp.pseudo_c;
  j["pseudo_z"] = hp.pseudo_z;
  j["sigma_c"] = hp.sigma_c;
  j["sigma_z"] = hp.sigma_z;
  j["alpha_c"] = hp.alpha_c;
  j["alpha_z"] = hp.alpha_z;
  j["beta_c"] = hp.beta_c;
  j["beta_z"] = hp.beta_z;
  j["gamma_c"] = hp.gamma_c;
  j["gamma_z"] = hp.gamma_z;
  j["z_clamp"] = hp.z_clamp;
  j["max_iters"] = hp.max_iters;
  j["elbo_tol"] = hp.elbo_tol;
  return j;
}

HyperParams hp_from_json(const json& j) {
  HyperParams hp;
  hp.latent_dim = static_cast<int>(number_field(j, "latent_dim"));
  hp.expert_cfg.num_experts = static_cast<int>(number_field(j, "num_experts"));
  hp.expert_cfg.lambda = number_field(j, "lambda");
  hp.pseudo_c = static_cast<int>(number_field(j, "pseudo_c"));
  hp.pseudo_z = static_cast<int>(number_field(j, "pseudo_z"));
  hp.sigma_c = number_field(j, "sigma_c");
  hp.sigma_z = number_field(j, "sigma_z");
  hp.alpha_c = number_field(j, "alpha_c");
  hp.alpha_z = number_field(j, "alpha_z");
  hp.beta_c = number_field(j, "beta_c");
  hp.beta_z = number_field(j, "beta_z");
  hp.gamma_c = number_field(j, "gamma_c");
  hp.gamma_z = number_field(j, "gamma_z");
  hp.z_clamp = number_field(j, "z_clamp");
  hp.max_iters = static_cast<int>(number_field(j, "max_iters"));
  hp.elbo_tol = number_field(j, "elbo_tol");
  return hp;
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path,
                const std::string& extra_config) {
  model.validate();
  json j;
  j["format_version"] = model.format_version;
  j["type"] = "esmc";
  j["tool"] = {{"name", "esmc"}, {"version", kVersion}};
  if (!extra_config.empty()) {
    j["config"] = json::parse(extra_config, nullptr, false);
    if (j["config"].is_discarded())
      throw FormatError("config: provenance block is not valid JSON");
  }
  j["hyperparams"] = hp_to_json(model.hp);
  j["layer_c"] = layer_to_json(model.layer_c, "layer_c");
  j["layer_z"] = layer_to_json(model.layer_z, "layer_z");

  std::ofstream out(path);
  if (!out) throw InvalidArgumentError("cannot open model file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw InvalidArgumentError("failed writing model file: " + path);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open model file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw FormatError("model file: not valid JSON");

  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw FormatError("format_version: missing");
  if (j["format_version"].get<int>() != 1)
    throw FormatError("format_version: expected 1, got " + j["format_version"].dump());
  if (!j.contains("type") || j["type"] != "esmc")
    throw FormatError("type: expected \"esmc\"");

  TrainedModel m;
  m.format_version = 1;
  if (!j.contains("hyperparams")) throw FormatError("hyperparams: missing");
  m.hp = hp_from_json(j["hyperparams"]);
  if (!j.contains("layer_c") || !j.contains("layer_z"))
    throw FormatError("layer_c/layer_z: missing");
  m.layer_c = layer_from_json(j["layer_c"], "layer_c");
  m.layer_z = layer_from_json(j["layer_z"], "layer_z");
  m.validate();
  return m;
}

}  // namespace esmc
