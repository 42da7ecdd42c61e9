#ifndef TSNL_MODELS_LGSSM_HPP
#define TSNL_MODELS_LGSSM_HPP

#include <functional>
#include <vector>

#include "tsnl/ssm.hpp"

namespace tsnl {

/// Linear-Gaussian SSM:
///   x_t = A x_{t-1} + q_t,  q_t ~ N(q0, Q)
///   y_t = H x_t + r_t,      r_t ~ N(r0, R)
///   x_0 ~ N(mu0, Sigma0)
struct LgssmSpec {
  Matrix A, H;
  Vector q0, r0;
  Matrix Q, R;
  Vector mu0;
  Matrix Sigma0;

  static LgssmSpec scalar(double A, double H, double q0, double r0, double Q,
                          double R, double mu0, double Sigma0);
};

/// An LGSSM whose spec entries may be overridden by theta through a binder,
/// e.g. theta[0] -> Q(0,0) for the dynamics-covariance inference task.
class LgssmModel : public SsmModel {
 public:
  using SpecBinder = std::function<LgssmSpec(LgssmSpec, const ParamVector&)>;

  explicit LgssmModel(LgssmSpec base, SpecBinder binder = nullptr)
      : base_(std::move(base)), binder_(std::move(binder)) {}

  int state_dim() const override { return static_cast<int>(base_.A.rows()); }
  int obs_dim() const override { return static_cast<int>(base_.H.rows()); }

  LgssmSpec bound(const ParamVector& theta) const {
    return binder_ ? binder_(base_, theta) : base_;
  }
  const LgssmSpec& base() const { return base_; }

  Vector sample_initial(const ParamVector& theta, Rng& rng) const override;
  Vector sample_transition(const ParamVector& theta, const Vector& x_prev,
                           Rng& rng, CostLedger& ledger) const override;
  Vector sample_observation(const ParamVector& theta, const Vector& x,
                            Rng& rng) const override;
  double observation_loglik(const ParamVector& theta, const Vector& x,
                            const Vector& y) const override;

 private:
  LgssmSpec base_;
  SpecBinder binder_;
};

/// Exact log p(y_{1:T} | theta) by the Kalman filter, accumulated as the sum
/// of log predictive densities. Throws NumericalError if an innovation
/// covariance is not positive definite.
double kalman_loglik(const LgssmSpec& spec, const std::vector<Vector>& y);

/// Convenience overload applying the model's theta binder first.
double kalman_loglik(const LgssmModel& model, const ParamVector& theta,
                     const std::vector<Vector>& y);

}  // namespace tsnl

#endif  // TSNL_MODELS_LGSSM_HPP
