#ifndef TSNL_ABC_HPP
#define TSNL_ABC_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "tsnl/ssm.hpp"

namespace tsnl {

/// Gaussian kernel density ratio between two particle populations,
///   r_alpha(theta) = sum_n alpha_n exp(-||theta - anchor_n||^2 / 2 sigma^2),
/// with the anchors being the previous population.
struct RatioEstimate {
  Vector alpha;
  double sigma = 1.0;
  std::vector<ParamVector> anchors;

  double value(const ParamVector& theta) const;
};

/// Fits alpha by the fixed-point iteration
///   alpha <- alpha (1/(lambda e0)) E^T beta,  beta = 1/(E alpha),
/// from alpha_n = 1/(lambda e0_n), where E0/E are the prev-prev and
/// curr-prev kernel matrices, e0 the row sums of E0, and lambda the current
/// population size. Returns only when both the fixed-point residual and the
/// constraint residual |alpha^T e0 - 1| are below tol; otherwise throws
/// NumericalError carrying the residuals. Near-duplicate anchors leave
/// directions of alpha unidentified and the iteration then crawls at rate
/// 1/iters along them, hence the loose default tol.
RatioEstimate estimate_ratio_alpha(const std::vector<ParamVector>& theta_prev,
                                   const std::vector<ParamVector>& theta_curr,
                                   double sigma, int max_iters = 50000,
                                   double tol = 1e-7);

/// Supremum of r_alpha: iterates the kernel-weighted-mean fixed point
/// theta <- sum_n w_n(theta) anchor_n / sum_n w_n(theta) from every start,
/// and returns the max ratio over converged points and all starts, so the
/// result always dominates the anchor values. Warns to stderr if no start
/// converges.
double ratio_supremum(const RatioEstimate& ratio,
                      const std::vector<ParamVector>& starts,
                      int max_iters = 200, double tol = 1e-10);

struct AbcConfig {
  int n_particles = 256;
  double ess_frac = 0.5;        // resample when ESS < ess_frac * N
  double ratio_cap = 2.0;       // admissibility cap on c_hat for the next eps
  double stop_delta = 0.1;      // stop when c_hat < 1 + stop_delta
  double min_accept_rate = 0.01;
  int max_populations = 30;
  // 0 = unlimited. Checked between populations, so a run may overshoot by
  // up to one population's worth of simulations; the ledger has the truth.
  std::uint64_t max_dynamics_calls = 0;
  std::vector<double> quantile_levels = {0.1, 0.2, 0.3, 0.4, 0.5,
                                         0.6, 0.7, 0.8, 0.9};
};

struct AbcTraceRow {
  int iteration = 0;
  double epsilon = 0.0;
  double accept_rate = 1.0;
  double ess = 0.0;
  double c_hat = std::numeric_limits<double>::quiet_NaN();
  int resampled = 0;
};

struct AbcResult {
  std::vector<ParamVector> particles;
  Vector weights;  // normalized
  std::vector<AbcTraceRow> trace;
  std::string stop_reason;  // converged | acceptance_floor | max_populations |
                            // budget

  /// Equal-weight posterior draws via multinomial resampling.
  std::vector<ParamVector> resample_equal(int n, Rng& rng) const;
};

/// SMC-ABC with Euclidean distance on full observation sequences, Gaussian
/// perturbation kernel of covariance twice the weighted particle covariance,
/// ESS-triggered multinomial resampling, and tolerances chosen adaptively:
/// the next epsilon is the smallest distance quantile of the current
/// population whose density-ratio supremum stays below ratio_cap.
AbcResult smc_abc_run(const SsmModel& model, const Prior& prior,
                      const std::vector<Vector>& y_obs, const AbcConfig& cfg,
                      Rng& rng, CostLedger& ledger);

/// CSV columns: iteration, epsilon, accept_rate, ess, c_hat, resampled.
void write_abc_trace_csv(std::ostream& os, const std::vector<AbcTraceRow>& trace);

}  // namespace tsnl

#endif  // TSNL_ABC_HPP
