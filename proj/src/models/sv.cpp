#include "tsnl/models/sv.hpp"

#include <cmath>

namespace tsnl {

Matrix SvSpec::observation_cov(const Vector& x) const {
  const Vector vol = (x.array() / 2.0).exp();
  const Matrix sigma_t = vol.asDiagonal() * C * vol.asDiagonal();
  Eigen::LLT<Matrix> llt(sigma_t);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("sv: Cholesky of Sigma_t failed");
  }
  const Matrix L = llt.matrixL();
  return L * R * L.transpose();
}

Vector SvModel::sample_initial(const ParamVector& theta, Rng& rng) const {
  const SvSpec s = bound(theta);
  return mvn_sample(s.mu0, s.Sigma0, rng);
}

Vector SvModel::sample_transition(const ParamVector& theta, const Vector& x_prev,
                                  Rng& rng, CostLedger& ledger) const {
  const SvSpec s = bound(theta);
  ledger.add();
  return mvn_sample(s.A * x_prev + s.b, s.Q, rng);
}

Vector SvModel::sample_observation(const ParamVector& theta, const Vector& x,
                                   Rng& rng) const {
  const SvSpec s = bound(theta);
  return mvn_sample(s.d, s.observation_cov(x), rng);
}

double SvModel::observation_loglik(const ParamVector& theta, const Vector& x,
                                   const Vector& y) const {
  const SvSpec s = bound(theta);
  return mvn_logpdf(y, s.d, s.observation_cov(x));
}

SvSpec sv2d_default_spec() {
  SvSpec s;
  s.A = 0.9 * Matrix::Identity(2, 2);
  s.b = Vector::Zero(2);
  s.d = Vector::Zero(2);
  s.C = Matrix::Identity(2, 2);
  s.C(0, 1) = s.C(1, 0) = 0.52;
  s.Q = 0.05 * Matrix::Identity(2, 2);
  s.R = Matrix::Identity(2, 2);
  s.mu0 = Vector::Zero(2);
  s.Sigma0 = 0.25 * Matrix::Identity(2, 2);
  return s;
}

}  // namespace tsnl
