#ifndef TSNL_TESTS_ORACLES_HPP
#define TSNL_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "tsnl/models/lgssm.hpp"

namespace tsnl::oracles {

struct GridPosterior {
  double mean = 0.0;
  double sd = 0.0;
};

/// Brute-force posterior of a positive scalar parameter on a log-spaced grid:
/// weights w_i proportional to exp(loglik(q_i) + logprior(q_i)) * q_i (the
/// q_i factor is the log-grid measure).
inline GridPosterior grid_posterior_log(
    const std::function<double(double)>& loglik,
    const std::function<double(double)>& logprior, double q_lo, double q_hi,
    int n = 200) {
  std::vector<double> q(n), logw(n);
  double maxw = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double l =
        std::log(q_lo) + (std::log(q_hi) - std::log(q_lo)) * i / (n - 1);
    q[i] = std::exp(l);
    logw[i] = loglik(q[i]) + logprior(q[i]) + l;  // + log q_i
    maxw = std::max(maxw, logw[i]);
  }
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::exp(logw[i] - maxw);
    z += w;
    m1 += w * q[i];
    m2 += w * q[i] * q[i];
  }
  m1 /= z;
  m2 /= z;
  return {m1, std::sqrt(std::max(0.0, m2 - m1 * m1))};
}

/// Posterior of the LGSSM dynamics variance Q under the log-normal(-2, 1)
/// prior given observations y, via the Kalman oracle.
inline GridPosterior lgssm_q_posterior(const LgssmSpec& base,
                                       const std::vector<Vector>& y,
                                       double q_lo = 1e-3, double q_hi = 10.0,
                                       int n = 200) {
  return grid_posterior_log(
      [&](double q) {
        LgssmSpec s = base;
        s.Q(0, 0) = q;
        return kalman_loglik(s, y);
      },
      [](double q) {
        const double z = std::log(q);
        return gauss_logpdf(z, -2.0, 1.0) - z;
      },
      q_lo, q_hi, n);
}

}  // namespace tsnl::oracles

#endif  // TSNL_TESTS_ORACLES_HPP
