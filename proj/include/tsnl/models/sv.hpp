#ifndef TSNL_MODELS_SV_HPP
#define TSNL_MODELS_SV_HPP

#include <functional>

#include "tsnl/ssm.hpp"

namespace tsnl {

/// Multivariate stochastic volatility model:
///   x_t = A x_{t-1} + b + q_t,  q_t ~ N(0, Q)
///   y_t = d + Sigma_t^{1/2} r_t, r_t ~ N(0, R)
/// with Sigma_t = D_t C D_t, D_t = diag(exp(x_t/2)). C is the asset
/// correlation matrix; R defaults to the identity so Sigma_t is the full
/// observation covariance.
struct SvSpec {
  Matrix A;
  Vector b, d;
  Matrix C;
  Matrix Q;
  Matrix R;
  Vector mu0;
  Matrix Sigma0;

  /// Observation covariance L_Sigma R L_Sigma^T at log-volatility state x.
  /// Throws NumericalError if the Cholesky of Sigma_t fails.
  Matrix observation_cov(const Vector& x) const;
};

class SvModel : public SsmModel {
 public:
  using SpecBinder = std::function<SvSpec(SvSpec, const ParamVector&)>;

  explicit SvModel(SvSpec base, SpecBinder binder = nullptr)
      : base_(std::move(base)), binder_(std::move(binder)) {}

  int state_dim() const override { return static_cast<int>(base_.A.rows()); }
  int obs_dim() const override { return static_cast<int>(base_.d.size()); }

  SvSpec bound(const ParamVector& theta) const {
    return binder_ ? binder_(base_, theta) : base_;
  }

  Vector sample_initial(const ParamVector& theta, Rng& rng) const override;
  Vector sample_transition(const ParamVector& theta, const Vector& x_prev,
                           Rng& rng, CostLedger& ledger) const override;
  Vector sample_observation(const ParamVector& theta, const Vector& x,
                            Rng& rng) const override;
  double observation_loglik(const ParamVector& theta, const Vector& x,
                            const Vector& y) const override;

 private:
  SvSpec base_;
  SpecBinder binder_;
};

/// The 2D correlation-inference setup: theta[0] is the off-diagonal entry of C.
SvSpec sv2d_default_spec();

}  // namespace tsnl

#endif  // TSNL_MODELS_SV_HPP
