#include "esmc/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "esmc/errors.hpp"
#include "esmc/experts.hpp"
#include "esmc/kernel.hpp"
#include "esmc/rng.hpp"

namespace esmc {

namespace {

constexpr double kSigmaZFloor = 1e-3;
constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

Matrix regularized_gram(const PseudoSet& pseudo) {
  Matrix g = gram(pseudo.points, pseudo.kernel);
  g.diagonal().array() += pseudo.input_noise * pseudo.input_noise;
  return g;
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

}  // namespace

LabelPca label_pca(const Matrix& labels, int latent_dim) {
  if (latent_dim < 1 || latent_dim > labels.cols())
    throw InvalidArgumentError("label_pca: latent_dim out of range");
  LabelPca out;
  out.label_mean = labels.colwise().mean();
  const Matrix centered = labels.rowwise() - out.label_mean.transpose();
  const Matrix scatter = centered.transpose() * centered;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
  if (eig.info() != Eigen::Success)
    throw NumericalError("label_pca: eigendecomposition failed");

  // Eigenvalues come back ascending; take the trailing columns,
  // largest first, and fix each sign so the dominant entry is positive.
  const int k = static_cast<int>(labels.cols());
  out.basis.resize(k, latent_dim);
  for (int l = 0; l < latent_dim; ++l) {
    Vector v = eig.eigenvectors().col(k - 1 - l);
    int arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    out.basis.col(l) = v;
  }
  out.coords = centered * out.basis;
  return out;
}

VariationalState init_state(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  if (data.n_labeled < 1)
    throw InvalidArgumentError("init_state: training needs labeled instances");

  VariationalState st;
  st.hp = cfg.hp;
  st.hp.validate();
  const int n = data.n();
  const int num_l = data.n_labeled;
  const int k = data.num_labels;
  const int l = st.hp.latent_dim;
  if (l > k)
    throw InvalidArgumentError("init_state: latent_dim must not exceed the label count");

  const int m = st.hp.pseudo_c > 0 ? st.hp.pseudo_c : choose_num_pseudo(n);
  if (st.hp.pseudo_z > 0 && st.hp.pseudo_z != m)
    throw InvalidArgumentError(
        "init_state: pseudo counts must match (latent pseudo-points are propagated)");
  if (m > n)
    throw InvalidArgumentError("init_state: pseudo count exceeds instance count");
  st.hp.pseudo_c = m;
  st.hp.pseudo_z = m;
  st.hp.z_clamp = st.hp.resolved_clamp();
  st.sigma_z_auto = !(st.hp.sigma_z > 0.0);

  if (!(st.hp.sigma_c > 0.0))
    st.hp.sigma_c = bandwidth_heuristic(data.features, cfg.seed);

  Rng rng(cfg.seed);

  // Feature-side pseudo subset over all instances, labeled or not.
  const std::vector<int> idx = rng.sample_without_replacement(n, m);
  Matrix s_c(m, data.num_features());
  for (int i = 0; i < m; ++i) s_c.row(i) = data.features.row(idx[i]);

  // Embedding: label principal projection for the labeled block, small
  // noise for the rest.
  st.c_mean = Matrix::Zero(n, l);
  st.c_mean.topRows(num_l) = label_pca(data.labels, l).coords;
  for (int i = num_l; i < n; ++i)
    for (int j = 0; j < l; ++j) st.c_mean(i, j) = 0.01 * rng.normal();

  const double clamp = st.hp.z_clamp;
  st.z_mean = Matrix::Zero(n, k);
  st.z_var = Matrix::Ones(n, k);
  for (int i = 0; i < num_l; ++i)
    for (int j = 0; j < k; ++j) st.z_mean(i, j) = data.labels(i, j) == 1.0 ? clamp : -1.0;

  st.layer_c.pseudo = PseudoSet{std::move(s_c), KernelConfig{st.hp.sigma_c}, st.hp.alpha_c};
  st.layer_c.out_dim = l;
  st.layer_c.value_mean = Matrix::Zero(m, l);
  st.layer_c.obs_noise = st.hp.beta_c;
  st.layer_c.residual_noise = st.hp.gamma_c;
  st.layer_c.cov_chol = CholFactor::factor(regularized_gram(st.layer_c.pseudo)).llt().matrixL();

  st.layer_z.pseudo.input_noise = st.hp.alpha_z;
  st.layer_z.out_dim = k;
  st.layer_z.value_mean = Matrix::Zero(m, k);
  st.layer_z.obs_noise = st.hp.beta_z;
  st.layer_z.residual_noise = st.hp.gamma_z;
  propagate_pseudo(st);  // latent pseudo-points and bandwidth
  st.layer_z.cov_chol = CholFactor::factor(regularized_gram(st.layer_z.pseudo)).llt().matrixL();

  update_responsibilities(st, data);
  st.xi = Matrix::Zero(num_l, k);
  update_xi_all(st, data, cfg.xi_rule);
  return st;
}

void update_responsibilities(VariationalState& state, const Dataset& data) {
  const int num_l = data.n_labeled;
  const int k = data.num_labels;
  const double lambda = state.hp.expert_cfg.lambda;
  if (state.resp_rest.rows() != num_l) state.resp_rest = Matrix::Zero(num_l, k);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < num_l; ++i)
    for (int j = 0; j < k; ++j)
      state.resp_rest(i, j) =
          data.labels(i, j) == 1.0 ? 1.0 : sigmoid(lambda * state.z_mean(i, j));
}

void update_xi_all(VariationalState& state, const Dataset& data, XiRule rule) {
  const int num_l = data.n_labeled;
  const int k = data.num_labels;
  if (state.xi.rows() != num_l) state.xi = Matrix::Zero(num_l, k);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < num_l; ++i)
    for (int j = 0; j < k; ++j) {
      const double var = rule == XiRule::kCorrected ? state.z_var(i, j) : 0.0;
      state.xi(i, j) = update_xi(state.z_mean(i, j), var, state.hp.expert_cfg);
    }
}

namespace {

inline void qz_row(VariationalState& state, const Dataset& data, const Matrix& path,
                   int i) {
  const int k = data.num_labels;
  const double v_z = state.layer_z.noise_var();
  const double lambda = state.hp.expert_cfg.lambda;
  const int b = state.hp.expert_cfg.num_experts;
  const double clamp = state.hp.resolved_clamp();

  if (i >= data.n_labeled) {
    for (int j = 0; j < k; ++j) {
      state.z_mean(i, j) = path(i, j);
      state.z_var(i, j) = v_z;
    }
    return;
  }
  for (int j = 0; j < k; ++j) {
    const bool positive = data.labels(i, j) == 1.0;
    const double r1 = positive ? 1.0 : 0.0;
    const double sum_e = r1 + (b - 1) * state.resp_rest(i, j);
    const double tau = bound_curvature(state.xi(i, j));
    const double prec = 1.0 / v_z + 2.0 * b * tau * lambda * lambda;
    const double lin = path(i, j) / v_z + lambda * (sum_e - 0.5 * b);
    double mu = lin / prec;
    if (positive) mu = std::max(mu, clamp);
    state.z_mean(i, j) = mu;
    state.z_var(i, j) = 1.0 / prec;
  }
}

}  // namespace

void update_q_z_serial(VariationalState& state, const Dataset& data) {
  const Matrix path = projection(state.layer_z, state.c_mean) * state.layer_z.value_mean;
  for (int i = 0; i < data.n(); ++i) qz_row(state, data, path, i);
}

void update_q_z(VariationalState& state, const Dataset& data) {
  const Matrix path = projection(state.layer_z, state.c_mean) * state.layer_z.value_mean;
  const int n = data.n();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) qz_row(state, data, path, i);
}

void update_q_u(VariationalState& state, const Dataset& data, GpSide side) {
  SparseGpLayer& layer = side == GpSide::kFeature ? state.layer_c : state.layer_z;
  const Matrix& inputs = side == GpSide::kFeature ? data.features : state.c_mean;
  const Matrix& targets = side == GpSide::kFeature ? state.c_mean : state.z_mean;

  const Matrix a = projection(layer, inputs);
  const double v = layer.noise_var();
  const Matrix prior_inv = prior_precision(layer.pseudo);

  Matrix post_prec = prior_inv + a.transpose() * a / v;
  post_prec = 0.5 * (post_prec + post_prec.transpose());
  const CholFactor f = CholFactor::factor(post_prec);

  layer.value_mean = f.solve(a.transpose() * targets / v);
  Matrix cov = f.inverse();
  cov = 0.5 * (cov + cov.transpose());
  layer.cov_chol = CholFactor::factor(cov).llt().matrixL();
}

// ---------------------------------------------------------------------------
// Embedding updates. The local objective for row n collects every ELBO term
// that depends on c_n: the c-layer Gaussian around the projected mean and,
// through the latent-side projection a(c), the expected z log-densities
// including the pseudo-value covariance quadratic.
// ---------------------------------------------------------------------------

namespace {

struct CRowContext {
  Matrix base_c;          // (N+I) x L projected c-layer means
  Matrix t_all;           // M x (N+I): value_mean_z * z_mean^T
  Matrix p2;              // M x M: VM VM^T + K * cov_z
  Eigen::LLT<Matrix> llt_z;
  const Matrix* s_z = nullptr;
  double v_c = 0.0, v_z = 0.0, inv_bw2 = 0.0;

  static CRowContext build(const VariationalState& st, const Dataset& data) {
    CRowContext ctx;
    ctx.base_c = projection(st.layer_c, data.features) * st.layer_c.value_mean;
    ctx.t_all = st.layer_z.value_mean * st.z_mean.transpose();
    const Matrix cov_z = st.layer_z.cov_chol * st.layer_z.cov_chol.transpose();
    ctx.p2 = st.layer_z.value_mean * st.layer_z.value_mean.transpose() +
             static_cast<double>(data.num_labels) * cov_z;
    ctx.llt_z = CholFactor::factor(regularized_gram(st.layer_z.pseudo)).llt();
    ctx.s_z = &st.layer_z.pseudo.points;
    ctx.v_c = st.layer_c.noise_var();
    ctx.v_z = st.layer_z.noise_var();
    const double bw = st.layer_z.pseudo.kernel.bandwidth;
    ctx.inv_bw2 = 1.0 / (bw * bw);
    return ctx;
  }

  Vector kappa_vec(const Vector& c) const {
    const int m = static_cast<int>(s_z->rows());
    Vector k(m);
    for (int j = 0; j < m; ++j) {
      const double d2 = (s_z->row(j).transpose() - c).squaredNorm();
      k[j] = std::exp(-0.5 * d2 * inv_bw2);
    }
    return k;
  }

  double objective(int row, const Vector& c) const {
    const Vector k = kappa_vec(c);
    const Vector a = llt_z.solve(k);
    const double data_term = a.dot(t_all.col(row)) / v_z;
    const double quad_term = a.dot(p2 * a) / (2.0 * v_z);
    const double c_term = (c - base_c.row(row).transpose()).squaredNorm() / (2.0 * v_c);
    return data_term - quad_term - c_term;
  }

  Vector gradient(int row, const Vector& c) const {
    const Vector k = kappa_vec(c);
    const Vector a = llt_z.solve(k);
    const Vector g_a = (t_all.col(row) - p2 * a) / v_z;
    const Vector w = llt_z.solve(g_a);
    Vector grad = -(c - base_c.row(row).transpose()) / v_c;
    for (int j = 0; j < k.size(); ++j)
      grad += (w[j] * k[j] * inv_bw2) * (s_z->row(j).transpose() - c);
    return grad;
  }
};

}  // namespace

double c_row_objective(const VariationalState& state, const Dataset& data, int row,
                       const Vector& c) {
  return CRowContext::build(state, data).objective(row, c);
}

Vector c_row_gradient(const VariationalState& state, const Dataset& data, int row,
                      const Vector& c) {
  return CRowContext::build(state, data).gradient(row, c);
}

void update_q_c(VariationalState& state, const Dataset& data, const TrainConfig& cfg) {
  const CRowContext ctx = CRowContext::build(state, data);
  const int n = data.n();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const Vector c0 = state.c_mean.row(i).transpose();
    const double j0 = ctx.objective(i, c0);
    const Vector dir = ctx.v_c * ctx.gradient(i, c0);
    double step = cfg.c_step;
    const double tol = 1e-12 * std::max(1.0, std::fabs(j0));
    for (int bt = 0; bt < cfg.c_backtracks; ++bt) {
      const Vector cand = c0 + step * dir;
      if (ctx.objective(i, cand) >= j0 - tol) {
        state.c_mean.row(i) = cand.transpose();
        break;
      }
      step *= 0.5;
    }
  }
}

void propagate_pseudo(VariationalState& state) {
  const Matrix a = projection(state.layer_c, state.layer_c.pseudo.points);
  state.layer_z.pseudo.points = a * state.layer_c.value_mean;
  if (state.sigma_z_auto) {
    double mean = 0.0;
    if (state.layer_z.pseudo.count() >= 2)
      mean = mean_pairwise_distance(state.layer_z.pseudo.points);
    state.layer_z.pseudo.kernel.bandwidth = std::max(2.0 * mean, kSigmaZFloor);
  } else {
    state.layer_z.pseudo.kernel.bandwidth = state.hp.sigma_z;
  }
}

namespace {

// KL(q || prior) summed over a layer's output dimensions; the covariance
// is shared, the means are not.
double layer_kl(const SparseGpLayer& layer) {
  const int m = layer.pseudo.count();
  const CholFactor prior = CholFactor::factor(regularized_gram(layer.pseudo));
  const Matrix cov = layer.cov_chol * layer.cov_chol.transpose();
  const double trace = prior.solve(cov).trace();
  double logdet_cov = 0.0;
  for (int i = 0; i < m; ++i) logdet_cov += 2.0 * std::log(layer.cov_chol(i, i));
  const double quad = layer.value_mean.cwiseProduct(prior.solve(layer.value_mean)).sum();
  const double d = static_cast<double>(layer.out_dim);
  return 0.5 * (d * (trace - m + prior.log_det() - logdet_cov) + quad);
}

}  // namespace

double elbo(const VariationalState& state, const Dataset& data) {
  const int n = data.n();
  const int num_l = data.n_labeled;
  const int k = data.num_labels;
  const int l = state.hp.latent_dim;
  const double v_c = state.layer_c.noise_var();
  const double v_z = state.layer_z.noise_var();
  const double lambda = state.hp.expert_cfg.lambda;
  const int b = state.hp.expert_cfg.num_experts;

  double total = -layer_kl(state.layer_c) - layer_kl(state.layer_z);
  if (n == 0) return total;

  const Matrix a_c = projection(state.layer_c, data.features);
  const Matrix a_z = projection(state.layer_z, state.c_mean);
  const Matrix mean_c = a_c * state.layer_c.value_mean;
  const Matrix mean_z = a_z * state.layer_z.value_mean;
  const Matrix w_c = a_c * state.layer_c.cov_chol;  // row norms give a Sigma a^T
  const Matrix w_z = a_z * state.layer_z.cov_chol;

  std::vector<double> row_part(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double p = 0.0;
    // expected log-density of the embedding row
    p -= ((state.c_mean.row(i) - mean_c.row(i)).squaredNorm() +
          l * w_c.row(i).squaredNorm()) /
         (2.0 * v_c);
    // expected log-density of the suitability row + q(Z) entropy
    p -= ((state.z_mean.row(i) - mean_z.row(i)).squaredNorm() +
          state.z_var.row(i).sum() + k * w_z.row(i).squaredNorm()) /
         (2.0 * v_z);
    for (int j = 0; j < k; ++j) p += 0.5 * std::log(state.z_var(i, j));

    if (i < num_l) {
      for (int j = 0; j < k; ++j) {
        const bool positive = data.labels(i, j) == 1.0;
        const double rest = state.resp_rest(i, j);
        const double sum_e = (positive ? 1.0 : 0.0) + (b - 1) * rest;
        const double mu = state.z_mean(i, j);
        const double var = state.z_var(i, j);
        const double x = state.xi(i, j);
        const double tau = bound_curvature(x);
        p += lambda * mu * sum_e;
        p += b * (std::log(sigmoid(x)) + 0.5 * (-lambda * mu - x) -
                  tau * (lambda * lambda * (mu * mu + var) - x * x));
        if (!positive) p += (b - 1) * binary_entropy(rest);
      }
    }
    row_part[i] = p;
  }
  for (double p : row_part) total += p;

  total -= 0.5 * n * l * (kLogTwoPi + std::log(v_c));
  total -= 0.5 * n * k * (kLogTwoPi + std::log(v_z));
  total += 0.5 * n * k * (kLogTwoPi + 1.0);  // q(Z) entropy constant
  return total;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  VariationalState st = init_state(data, cfg);

  const auto emit = [&](int iter, double value, bool propagated) {
    if (!cfg.verbose) return;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "{\"iter\":%d,\"elbo\":%.17g,\"seconds\":%.3f,\"propagated\":%s}\n",
                 iter, value, secs, propagated ? "true" : "false");
  };

  double prev = elbo(st, data);
  st.elbo_trace.push_back(prev);
  emit(0, prev, false);

  for (int iter = 1; iter <= st.hp.max_iters; ++iter) {
    update_responsibilities(st, data);
    update_xi_all(st, data, cfg.xi_rule);
    update_q_z(st, data);
    update_q_u(st, data, GpSide::kLatent);
    update_q_c(st, data, cfg);
    if (cfg.propagate) propagate_pseudo(st);
    update_q_u(st, data, GpSide::kFeature);

    const double cur = elbo(st, data);
    st.elbo_trace.push_back(cur);
    emit(iter, cur, cfg.propagate);
    const double rel = std::fabs(cur - prev) / std::max(1.0, std::fabs(prev));
    prev = cur;
    if (rel < st.hp.elbo_tol) break;
  }

  TrainResult res;
  res.trace = st.elbo_trace;
  res.model.layer_c = std::move(st.layer_c);
  res.model.layer_z = std::move(st.layer_z);
  res.model.hp = st.hp;
  res.model.hp.sigma_c = res.model.layer_c.pseudo.kernel.bandwidth;
  res.model.hp.sigma_z = res.model.layer_z.pseudo.kernel.bandwidth;
  res.model.format_version = 1;
  return res;
}

}  // namespace esmc
