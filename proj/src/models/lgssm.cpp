#include "tsnl/models/lgssm.hpp"

#include <cmath>

namespace tsnl {

LgssmSpec LgssmSpec::scalar(double A, double H, double q0, double r0, double Q,
                            double R, double mu0, double Sigma0) {
  LgssmSpec s;
  s.A = Matrix::Constant(1, 1, A);
  s.H = Matrix::Constant(1, 1, H);
  s.q0 = Vector::Constant(1, q0);
  s.r0 = Vector::Constant(1, r0);
  s.Q = Matrix::Constant(1, 1, Q);
  s.R = Matrix::Constant(1, 1, R);
  s.mu0 = Vector::Constant(1, mu0);
  s.Sigma0 = Matrix::Constant(1, 1, Sigma0);
  return s;
}

Vector LgssmModel::sample_initial(const ParamVector& theta, Rng& rng) const {
  const LgssmSpec s = bound(theta);
  return mvn_sample(s.mu0, s.Sigma0, rng);
}

Vector LgssmModel::sample_transition(const ParamVector& theta, const Vector& x_prev,
                                     Rng& rng, CostLedger& ledger) const {
  const LgssmSpec s = bound(theta);
  ledger.add();
  return mvn_sample(s.A * x_prev + s.q0, s.Q, rng);
}

Vector LgssmModel::sample_observation(const ParamVector& theta, const Vector& x,
                                      Rng& rng) const {
  const LgssmSpec s = bound(theta);
  return mvn_sample(s.H * x + s.r0, s.R, rng);
}

double LgssmModel::observation_loglik(const ParamVector& theta, const Vector& x,
                                      const Vector& y) const {
  const LgssmSpec s = bound(theta);
  return mvn_logpdf(y, s.H * x + s.r0, s.R);
}

double kalman_loglik(const LgssmSpec& spec, const std::vector<Vector>& y) {
  const int d_x = static_cast<int>(spec.A.rows());
  Vector m = spec.mu0;
  Matrix P = spec.Sigma0;
  const Matrix I = Matrix::Identity(d_x, d_x);

  double ll = 0.0;
  for (const auto& yt : y) {
    const Vector m_pred = spec.A * m + spec.q0;
    const Matrix P_pred = spec.A * P * spec.A.transpose() + spec.Q;

    const Vector v = yt - (spec.H * m_pred + spec.r0);
    const Matrix S = spec.H * P_pred * spec.H.transpose() + spec.R;

    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("kalman_loglik: innovation covariance not positive definite");
    }
    ll += mvn_logpdf(yt, spec.H * m_pred + spec.r0, S);

    const Matrix K = P_pred * spec.H.transpose() * llt.solve(Matrix::Identity(S.rows(), S.cols()));
    m = m_pred + K * v;
    P = (I - K * spec.H) * P_pred;
  }
  return ll;
}

double kalman_loglik(const LgssmModel& model, const ParamVector& theta,
                     const std::vector<Vector>& y) {
  return kalman_loglik(model.bound(theta), y);
}

}  // namespace tsnl
