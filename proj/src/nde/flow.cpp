#include "tsnl/nde/flow.hpp"

#include <numeric>

namespace tsnl {

ConditionalFlow::ConditionalFlow(int event_dim, int context_dim, FlowConfig cfg,
                                 Rng& rng)
    : D_(event_dim), dc_(context_dim), cfg_(cfg) {
  const std::vector<int> hidden(cfg.n_hidden_layers, cfg.hidden_units);
  for (int k = 0; k < cfg.n_made; ++k) {
    layers_.emplace_back(D_, dc_, hidden, cfg.activation, rng);
    std::vector<int> perm(D_);
    std::iota(perm.begin(), perm.end(), 0);
    if (k % 2 == 1) std::reverse(perm.begin(), perm.end());
    perms_.push_back(std::move(perm));
  }
  ev_mean_ = Vector::Zero(D_);
  ev_sd_ = Vector::Ones(D_);
  ctx_mean_ = Vector::Zero(dc_);
  ctx_sd_ = Vector::Ones(dc_);
}

void ConditionalFlow::set_standardization(const Vector& ev_mean,
                                          const Vector& ev_sd,
                                          const Vector& ctx_mean,
                                          const Vector& ctx_sd) {
  ev_mean_ = ev_mean;
  ev_sd_ = ev_sd.cwiseMax(1e-12);
  ctx_mean_ = ctx_mean;
  ctx_sd_ = ctx_sd.cwiseMax(1e-12);
  std_logdet_ = -ev_sd_.array().log().sum();
}

Matrix ConditionalFlow::standardize_events(const Matrix& events) const {
  return (events.rowwise() - ev_mean_.transpose()).array().rowwise() /
         ev_sd_.transpose().array();
}

Matrix ConditionalFlow::standardize_contexts(const Matrix& contexts) const {
  if (dc_ == 0) return contexts;
  return (contexts.rowwise() - ctx_mean_.transpose()).array().rowwise() /
         ctx_sd_.transpose().array();
}

Vector ConditionalFlow::permuted(const Vector& z, int k) const {
  Vector p(D_);
  for (int i = 0; i < D_; ++i) p[i] = z[perms_[k][i]];
  return p;
}

Vector ConditionalFlow::log_prob(const Matrix& events,
                                 const Matrix& contexts) const {
  if (events.cols() != D_ || (dc_ > 0 && contexts.cols() != dc_)) {
    throw std::invalid_argument("flow: event/context width mismatch");
  }
  const Eigen::Index n = events.rows();
  Matrix Z = standardize_events(events);
  const Matrix C = standardize_contexts(contexts);
  Vector ll = Vector::Constant(n, std_logdet_ - 0.5 * D_ * kLog2Pi);
  Matrix mu, alpha;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Matrix Zp(n, D_);
    for (int i = 0; i < D_; ++i) Zp.col(i) = Z.col(perms_[k][i]);
    layers_[k].forward(Zp, C, mu, alpha, nullptr);
    Z = (Zp - mu).cwiseProduct((-alpha.array()).exp().matrix());
    if (!Z.allFinite() || !alpha.allFinite()) {
      throw NumericalError("flow: non-finite value in made layer " +
                           std::to_string(k));
    }
    ll -= alpha.rowwise().sum();
  }
  ll -= 0.5 * Z.rowwise().squaredNorm();
  return ll;
}

double ConditionalFlow::log_prob(const Vector& y, const Vector& context) const {
  Matrix ev(1, D_);
  ev.row(0) = y.transpose();
  Matrix ctx(1, dc_);
  if (dc_ > 0) ctx.row(0) = context.transpose();
  return log_prob(ev, ctx)[0];
}

Vector ConditionalFlow::inverse(const Vector& y, const Vector& context) const {
  Vector z = (y - ev_mean_).cwiseQuotient(ev_sd_);
  Matrix ctx(1, dc_);
  if (dc_ > 0) {
    ctx.row(0) = (context - ctx_mean_).cwiseQuotient(ctx_sd_).transpose();
  }
  Matrix mu, alpha;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Matrix zp(1, D_);
    zp.row(0) = permuted(z, static_cast<int>(k)).transpose();
    layers_[k].forward(zp, ctx, mu, alpha, nullptr);
    z = (zp.row(0).transpose() - mu.row(0).transpose())
            .cwiseProduct((-alpha.row(0).transpose().array()).exp().matrix());
  }
  return z;
}

Vector ConditionalFlow::forward_from_noise(const Vector& u,
                                           const Vector& context) const {
  Matrix ctx(1, dc_);
  if (dc_ > 0) {
    ctx.row(0) = (context - ctx_mean_).cwiseQuotient(ctx_sd_).transpose();
  }
  Vector z = u;
  Matrix mu, alpha;
  for (int k = static_cast<int>(layers_.size()) - 1; k >= 0; --k) {
    // fill the permuted vector dimension by dimension; head d only looks at
    // entries < d, so each pass fixes one coordinate for good
    Matrix p = Matrix::Zero(1, D_);
    for (int d = 0; d < D_; ++d) {
      layers_[k].forward(p, ctx, mu, alpha, nullptr);
      p(0, d) = z[d] * std::exp(alpha(0, d)) + mu(0, d);
    }
    Vector prev(D_);
    for (int i = 0; i < D_; ++i) prev[perms_[k][i]] = p(0, i);
    z = prev;
  }
  return ev_mean_ + z.cwiseProduct(ev_sd_);
}

Vector ConditionalFlow::sample(const Vector& context, Rng& rng) const {
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  Vector u(D_);
  for (int d = 0; d < D_; ++d) u[d] = stdnorm(rng);
  return forward_from_noise(u, context);
}

double ConditionalFlow::loss_and_grad(const Matrix& events,
                                      const Matrix& contexts,
                                      Vector& grad) const {
  if (events.cols() != D_ || (dc_ > 0 && contexts.cols() != dc_)) {
    throw std::invalid_argument("flow: event/context width mismatch");
  }
  const Eigen::Index n = events.rows();
  Matrix Z = standardize_events(events);
  const Matrix C = standardize_contexts(contexts);

  std::vector<MadeLayer::Cache> caches(layers_.size());
  std::vector<Matrix> outputs(layers_.size());  // Z_k per layer
  double loss = n * (0.5 * D_ * kLog2Pi - std_logdet_);
  Matrix mu, alpha;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Matrix Zp(n, D_);
    for (int i = 0; i < D_; ++i) Zp.col(i) = Z.col(perms_[k][i]);
    layers_[k].forward(Zp, C, mu, alpha, &caches[k]);
    Z = (Zp - mu).cwiseProduct((-alpha.array()).exp().matrix());
    if (!Z.allFinite() || !alpha.allFinite()) {
      throw NumericalError("flow: non-finite value in made layer " +
                           std::to_string(k));
    }
    outputs[k] = Z;
    loss += alpha.sum();
  }
  loss += 0.5 * Z.squaredNorm();

  std::vector<MadeLayer::Grads> grads;
  grads.reserve(layers_.size());
  for (const auto& layer : layers_) grads.emplace_back(layer);

  Matrix G = Z;  // d(sum loss)/d z_K
  for (int k = static_cast<int>(layers_.size()) - 1; k >= 0; --k) {
    const Matrix T = (-caches[k].alpha.array()).exp().matrix();
    const Matrix dmu = -G.cwiseProduct(T);
    const Matrix dalpha =
        Matrix::Ones(n, D_) - G.cwiseProduct(outputs[k]);
    const Matrix dinput = layers_[k].backward(caches[k], dmu, dalpha, grads[k]);
    const Matrix dp = G.cwiseProduct(T) + dinput;
    Matrix Gprev(n, D_);
    for (int i = 0; i < D_; ++i) Gprev.col(perms_[k][i]) = dp.col(i);
    G = Gprev;
  }

  grad.resize(trainable_parameter_count());
  int off = 0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    grads[k].write_flat(grad, off);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  grad *= inv_n;
  return loss * inv_n;
}

Vector ConditionalFlow::parameters() const {
  Vector flat(trainable_parameter_count());
  int off = 0;
  for (const auto& layer : layers_) layer.write_flat(flat, off);
  return flat;
}

void ConditionalFlow::set_parameters(const Vector& p) {
  if (p.size() != trainable_parameter_count()) {
    throw std::invalid_argument("set_parameters: wrong length");
  }
  int off = 0;
  for (auto& layer : layers_) layer.read_flat(p, off);
}

int ConditionalFlow::trainable_parameter_count() const {
  int n = 0;
  for (const auto& layer : layers_) n += layer.n_params();
  return n;
}

int ConditionalFlow::backbone_parameter_count() const {
  int n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<int>(layer.W[0].size() + layer.b[0].size());
    for (std::size_t m = 1; m < layer.W.size(); ++m) {
      n += static_cast<int>(layer.W[m].size());
    }
  }
  return n;
}

long long param_count(int K, int M, int H, int L, int d_y, int d_theta) {
  const long long first = static_cast<long long>(H) * (L + d_y + d_theta + 1);
  const long long deep = static_cast<long long>(M - 1) * H * H;
  return K * (first + deep);
}

nlohmann::json ConditionalFlow::to_json() const {
  nlohmann::json j;
  j["event_dim"] = D_;
  j["context_dim"] = dc_;
  j["n_made"] = cfg_.n_made;
  j["n_hidden_layers"] = cfg_.n_hidden_layers;
  j["hidden_units"] = cfg_.hidden_units;
  j["activation"] = cfg_.activation == Activation::Tanh ? "tanh" : "relu";
  auto vec = [](const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["ev_mean"] = vec(ev_mean_);
  j["ev_sd"] = vec(ev_sd_);
  j["ctx_mean"] = vec(ctx_mean_);
  j["ctx_sd"] = vec(ctx_sd_);
  j["params"] = vec(parameters());
  return j;
}

ConditionalFlow ConditionalFlow::from_json(const nlohmann::json& j) {
  FlowConfig cfg;
  cfg.n_made = j.at("n_made").get<int>();
  cfg.n_hidden_layers = j.at("n_hidden_layers").get<int>();
  cfg.hidden_units = j.at("hidden_units").get<int>();
  cfg.activation = j.at("activation").get<std::string>() == "relu"
                       ? Activation::Relu
                       : Activation::Tanh;
  Rng rng = make_stream(0, 0);  // init is overwritten below
  ConditionalFlow flow(j.at("event_dim").get<int>(),
                       j.at("context_dim").get<int>(), cfg, rng);
  auto vec = [&](const char* key) {
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))
        .eval();
  };
  flow.set_standardization(vec("ev_mean"), vec("ev_sd"), vec("ctx_mean"),
                           vec("ctx_sd"));
  flow.set_parameters(vec("params"));
  return flow;
}

}  // namespace tsnl
