#ifndef TSNL_NDE_FLOW_HPP
#define TSNL_NDE_FLOW_HPP

#include <nlohmann/json.hpp>
#include <vector>

#include "tsnl/nde/made.hpp"

namespace tsnl {

struct FlowConfig {
  int n_made = 5;
  int n_hidden_layers = 5;
  int hidden_units = 32;
  Activation activation = Activation::Tanh;
};

/// Conditional masked autoregressive flow: a stack of MADE transforms with
/// the event ordering reversed between consecutive layers, plus affine
/// standardization of events and contexts (training statistics live inside
/// the flow, so log_prob is a density over raw inputs).
class ConditionalFlow {
 public:
  ConditionalFlow(int event_dim, int context_dim, FlowConfig cfg, Rng& rng);

  int event_dim() const { return D_; }
  int context_dim() const { return dc_; }
  const FlowConfig& config() const { return cfg_; }

  double log_prob(const Vector& y, const Vector& context) const;
  /// Batch version: one record per row. Returns per-record log densities.
  Vector log_prob(const Matrix& events, const Matrix& contexts) const;

  Vector sample(const Vector& context, Rng& rng) const;
  /// Noise the flow maps to y: the stacked inverse transform.
  Vector inverse(const Vector& y, const Vector& context) const;
  Vector forward_from_noise(const Vector& u, const Vector& context) const;

  /// Mean negative log-likelihood over the batch and its gradient with
  /// respect to the flat parameter vector (exact reverse-mode).
  double loss_and_grad(const Matrix& events, const Matrix& contexts,
                       Vector& grad) const;

  Vector parameters() const;
  void set_parameters(const Vector& p);
  /// Length of the flat parameter vector (all weights, biases and heads).
  int trainable_parameter_count() const;
  /// Hidden-backbone count under the convention of param_count: full
  /// first-layer weights and biases plus hidden-to-hidden weights only.
  int backbone_parameter_count() const;

  void set_standardization(const Vector& ev_mean, const Vector& ev_sd,
                           const Vector& ctx_mean, const Vector& ctx_sd);

  nlohmann::json to_json() const;
  static ConditionalFlow from_json(const nlohmann::json& j);

 private:
  Matrix standardize_events(const Matrix& events) const;
  Matrix standardize_contexts(const Matrix& contexts) const;
  Vector permuted(const Vector& z, int k) const;

  int D_ = 0;
  int dc_ = 0;
  FlowConfig cfg_;
  std::vector<MadeLayer> layers_;
  std::vector<std::vector<int>> perms_;  // perms_[k][i]: source index of slot i
  Vector ev_mean_, ev_sd_, ctx_mean_, ctx_sd_;
  double std_logdet_ = 0.0;  // -sum log ev_sd
};

inline double flow_logprob(const ConditionalFlow& flow, const Vector& y,
                           const Vector& context) {
  return flow.log_prob(y, context);
}

inline Vector flow_sample(const ConditionalFlow& flow, const Vector& context,
                          Rng& rng) {
  return flow.sample(context, rng);
}

/// Parameter-count formula K (H (L + d_y + d_theta + 1) + (M-1) H^2). This
/// counts the hidden backbone with first-layer biases only; it matches
/// backbone_parameter_count for d_y = 1.
long long param_count(int K, int M, int H, int L, int d_y, int d_theta);

}  // namespace tsnl

#endif  // TSNL_NDE_FLOW_HPP
