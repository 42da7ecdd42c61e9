#ifndef TSNL_METRICS_HPP
#define TSNL_METRICS_HPP

#include <cstdint>
#include <vector>

#include "tsnl/common.hpp"

namespace tsnl {

/// Posterior-quality summary for one inference run against a known theta_0.
struct MetricReport {
  double e_kde = 0.0;
  double e_min = 0.0;
  double bias = 0.0;
  double stdev = 0.0;
  std::vector<int> rank;  // one entry per theta dimension
  std::uint64_t cost = 0;

  double rmse() const { return std::sqrt(bias * bias + stdev * stdev); }
};

/// Negative log density of theta_0 under a KDE with unit-covariance Gaussian
/// kernels centered at the samples:
///   -log[(1/K) sum_k N(theta_0; sample_k, I)].
double e_kde(const std::vector<ParamVector>& samples, const ParamVector& theta0);

/// min_k ||theta_0 - sample_k|| (Euclidean).
double e_min(const std::vector<ParamVector>& samples, const ParamVector& theta0);

/// bias = ||theta_0 - mean(samples)||,
/// stdev = sqrt((1/K) sum_k ||sample_k - mean||^2).
std::pair<double, double> bias_stdev(const std::vector<ParamVector>& samples,
                                     const ParamVector& theta0);

/// Per dimension, the count of samples below theta_0. Exact ties count as
/// below with probability 1/2 so that discrete posteriors still calibrate.
std::vector<int> rank_statistic(const std::vector<ParamVector>& samples,
                                const ParamVector& theta0, Rng& rng);

/// Frobenius norm of the lag-L sample autocovariance matrix
///   C_L = (1/(T-L)) sum_{t=1}^{T-L} (y_t - ybar)(y_{t+L} - ybar)^T
/// with ybar the full-sequence mean. Throws std::invalid_argument unless
/// T > L >= 0.
double acf_norm(const std::vector<Vector>& y, int L);

/// Computes every metric and checks the log-sum-exp sandwich
///   e_min^2/2 + (d/2) log 2pi <= e_kde <= e_min^2/2 + log K + (d/2) log 2pi,
/// throwing NumericalError if it fails.
MetricReport evaluate_posterior(const std::vector<ParamVector>& samples,
                                const ParamVector& theta0, std::uint64_t cost,
                                Rng& rng);

}  // namespace tsnl

#endif  // TSNL_METRICS_HPP
