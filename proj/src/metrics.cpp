#include "tsnl/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tsnl {

double e_kde(const std::vector<ParamVector>& samples, const ParamVector& theta0) {
  if (samples.empty()) throw std::invalid_argument("e_kde: no samples");
  const int K = static_cast<int>(samples.size());
  const int d = static_cast<int>(theta0.size());
  Vector logk(K);
  for (int k = 0; k < K; ++k) {
    logk[k] = -0.5 * (theta0 - samples[k]).squaredNorm();
  }
  return -(log_sum_exp(logk) - std::log(static_cast<double>(K))) +
         0.5 * d * kLog2Pi;
}

double e_min(const std::vector<ParamVector>& samples, const ParamVector& theta0) {
  if (samples.empty()) throw std::invalid_argument("e_min: no samples");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) best = std::min(best, (theta0 - s).norm());
  return best;
}

std::pair<double, double> bias_stdev(const std::vector<ParamVector>& samples,
                                     const ParamVector& theta0) {
  if (samples.empty()) throw std::invalid_argument("bias_stdev: no samples");
  Vector mean = Vector::Zero(theta0.size());
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (const auto& s : samples) ss += (s - mean).squaredNorm();
  const double stdev = std::sqrt(ss / static_cast<double>(samples.size()));
  return {(theta0 - mean).norm(), stdev};
}

std::vector<int> rank_statistic(const std::vector<ParamVector>& samples,
                                const ParamVector& theta0, Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("rank_statistic: no samples");
  std::bernoulli_distribution coin(0.5);
  std::vector<int> rank(theta0.size(), 0);
  for (const auto& s : samples) {
    for (int j = 0; j < theta0.size(); ++j) {
      if (s[j] < theta0[j]) {
        ++rank[j];
      } else if (s[j] == theta0[j] && coin(rng)) {
        ++rank[j];
      }
    }
  }
  return rank;
}

double acf_norm(const std::vector<Vector>& y, int L) {
  const int T = static_cast<int>(y.size());
  if (L < 0 || T <= L) {
    throw std::invalid_argument("acf_norm: need T > L >= 0");
  }
  const int d = static_cast<int>(y[0].size());
  Vector mean = Vector::Zero(d);
  for (const auto& yt : y) mean += yt;
  mean /= static_cast<double>(T);
  Matrix C = Matrix::Zero(d, d);
  for (int t = 0; t < T - L; ++t) {
    C += (y[t] - mean) * (y[t + L] - mean).transpose();
  }
  C /= static_cast<double>(T - L);
  return C.norm();
}

MetricReport evaluate_posterior(const std::vector<ParamVector>& samples,
                                const ParamVector& theta0, std::uint64_t cost,
                                Rng& rng) {
  MetricReport r;
  r.e_kde = e_kde(samples, theta0);
  r.e_min = e_min(samples, theta0);
  std::tie(r.bias, r.stdev) = bias_stdev(samples, theta0);
  r.rank = rank_statistic(samples, theta0, rng);
  r.cost = cost;

  const double d = static_cast<double>(theta0.size());
  const double base = 0.5 * r.e_min * r.e_min + 0.5 * d * kLog2Pi;
  const double hi = base + std::log(static_cast<double>(samples.size()));
  const double slack = 1e-9 * (1.0 + std::abs(r.e_kde));
  if (r.e_kde < base - slack || r.e_kde > hi + slack) {
    throw NumericalError("e_kde violates its log-sum-exp bounds");
  }
  return r;
}

}  // namespace tsnl
