#ifndef TSNL_NDE_MADE_HPP
#define TSNL_NDE_MADE_HPP

#include <vector>

#include "tsnl/common.hpp"

namespace tsnl {

enum class Activation { Tanh, Relu };

/// Degree assignment and binary masks for one MADE network.
///
/// Event inputs carry degrees 1..D; context inputs carry degree 0 and feed
/// every first-layer unit. Hidden degrees are spread evenly over 0..D-1
/// (deg[i] = floor(i*D/H)); a hidden unit connects to a predecessor of equal
/// or lower degree, and output head d connects to hidden units of degree
/// strictly below d. Degree-0 hidden units therefore carry the context
/// nonlinearly into every head, and head d never sees y_{d'}, d' >= d.
struct MaskSet {
  std::vector<int> input_degrees;                // D entries, values 1..D
  std::vector<std::vector<int>> hidden_degrees;  // one vector per hidden layer
  std::vector<Matrix> masks;  // masks[0]: H1 x (D + d_c), context columns all 1
  Matrix out_mask;            // D x H_last, strict inequality
};

/// The rng parameter is part of the interface but unused: degrees are evenly
/// spaced rather than sampled, which keeps networks reproducible and
/// guarantees every degree in 0..D-1 is populated whenever H >= D.
MaskSet build_masks(int D, int d_c, const std::vector<int>& hidden_sizes,
                    Rng& rng);

/// One masked autoregressive network computing all Gaussian heads
/// (mu_1..mu_D, alpha_1..alpha_D with sigma_d = exp(alpha_d)) in a single
/// pass. Batches are row-major: one record per row.
struct MadeLayer {
  int D = 0;
  int dc = 0;
  Activation act = Activation::Tanh;

  std::vector<Matrix> W;  // W[0]: H1 x (D+dc), W[m]: H_{m+1} x H_m
  std::vector<Vector> b;
  Matrix Vmu, Valpha;  // D x H_last
  Vector cmu, calpha;
  MaskSet masks;

  /// Hidden layers get uniform(-1/sqrt(fan_in), +) init; output heads start
  /// at zero so the untrained flow is the identity map.
  MadeLayer(int event_dim, int context_dim, const std::vector<int>& hidden_sizes,
            Activation activation, Rng& rng);

  int n_hidden_layers() const { return static_cast<int>(W.size()); }

  struct Cache {
    Matrix input;            // n x (D+dc)
    std::vector<Matrix> h;   // post-activation, n x H_m
    Matrix mu, alpha;        // n x D
  };

  /// events: n x D, contexts: n x dc. Fills mu/alpha (n x D); cache is
  /// optional and only needed for backward().
  void forward(const Matrix& events, const Matrix& contexts, Matrix& mu,
               Matrix& alpha, Cache* cache) const;

  struct Grads {
    std::vector<Matrix> dW;
    std::vector<Vector> db;
    Matrix dVmu, dValpha;
    Vector dcmu, dcalpha;

    explicit Grads(const MadeLayer& layer);
    void write_flat(Vector& flat, int& offset) const;
  };

  /// Backpropagates head gradients through the network, accumulating weight
  /// gradients into grads (masked entries stay zero) and returning the
  /// gradient with respect to the event inputs (n x D). Context gradients
  /// are discarded.
  Matrix backward(const Cache& cache, const Matrix& dmu, const Matrix& dalpha,
                  Grads& grads) const;

  int n_params() const;
  void write_flat(Vector& flat, int& offset) const;
  void read_flat(const Vector& flat, int& offset);
};

}  // namespace tsnl

#endif  // TSNL_NDE_MADE_HPP
