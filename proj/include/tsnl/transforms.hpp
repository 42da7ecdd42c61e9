#ifndef TSNL_TRANSFORMS_HPP
#define TSNL_TRANSFORMS_HPP

#include <cmath>
#include <vector>

#include "tsnl/common.hpp"

namespace tsnl {

/// Per-dimension reparameterization between the model's natural parameters
/// and the unconstrained scale used by MCMC and as flow context.
///   Identity: theta = z
///   Log:      theta = exp(z)   (positive parameters: variances, rates)
///   Tanh:     theta = tanh(z)  (parameters in (-1,1): correlations)
enum class Transform { Identity, Log, Tanh };

struct ParamTransform {
  std::vector<Transform> kinds;

  ParamTransform() = default;
  explicit ParamTransform(std::vector<Transform> k) : kinds(std::move(k)) {}

  static ParamTransform identity(int dim) {
    return ParamTransform(std::vector<Transform>(dim, Transform::Identity));
  }
  static ParamTransform uniform(int dim, Transform kind) {
    return ParamTransform(std::vector<Transform>(dim, kind));
  }

  int dim() const { return static_cast<int>(kinds.size()); }

  ParamVector to_unconstrained(const ParamVector& theta) const {
    ParamVector z(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
      switch (kinds[i]) {
        case Transform::Identity: z[i] = theta[i]; break;
        case Transform::Log: z[i] = std::log(theta[i]); break;
        case Transform::Tanh: z[i] = std::atanh(theta[i]); break;
      }
    }
    return z;
  }

  ParamVector to_constrained(const ParamVector& z) const {
    ParamVector theta(z.size());
    for (int i = 0; i < z.size(); ++i) {
      switch (kinds[i]) {
        case Transform::Identity: theta[i] = z[i]; break;
        case Transform::Log: theta[i] = std::exp(z[i]); break;
        case Transform::Tanh: theta[i] = std::tanh(z[i]); break;
      }
    }
    return theta;
  }

  /// log |d theta / d z| at z; added to log-targets so MCMC in z space
  /// samples the intended density over theta.
  double log_jacobian(const ParamVector& z) const {
    double lj = 0.0;
    for (int i = 0; i < z.size(); ++i) {
      switch (kinds[i]) {
        case Transform::Identity:
          break;
        case Transform::Log:
          lj += z[i];
          break;
        case Transform::Tanh: {
          // log(1 - tanh(z)^2) = 2 (log 2 - |z| - log1p(exp(-2|z|)))
          const double a = std::abs(z[i]);
          lj += 2.0 * (std::log(2.0) - a - std::log1p(std::exp(-2.0 * a)));
          break;
        }
      }
    }
    return lj;
  }
};

}  // namespace tsnl

#endif  // TSNL_TRANSFORMS_HPP
