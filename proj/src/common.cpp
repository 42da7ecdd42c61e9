#include "tsnl/common.hpp"

#include <cmath>

namespace tsnl {

Vector mvn_sample(const Vector& mean, const Matrix& cov, Rng& rng) {
  const auto d = mean.size();
  std::normal_distribution<double> n(0.0, 1.0);
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = n(rng);

  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) {
    return mean + llt.matrixL() * z;
  }
  // Semi-definite covariance (e.g. exactly zero noise on some axis).
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success) {
    throw NumericalError("mvn_sample: eigendecomposition of covariance failed");
  }
  Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + es.eigenvectors() * ev.asDiagonal() * z;
}

double mvn_logpdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("mvn_logpdf: covariance is not positive definite");
  }
  const Vector d = x - mean;
  const Vector w = llt.matrixL().solve(d);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    logdet += std::log(llt.matrixL()(i, i));
  }
  return -0.5 * (w.squaredNorm() + cov.rows() * kLog2Pi) - logdet;
}

}  // namespace tsnl
