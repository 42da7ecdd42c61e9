#ifndef TSNL_MCMC_HPP
#define TSNL_MCMC_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "tsnl/common.hpp"

namespace tsnl {

struct PosteriorSamples {
  std::vector<ParamVector> samples;
  std::vector<double> log_target;  // one entry per sample
  std::vector<int> accepted;       // 1 if the step moved
  double acceptance_rate = 0.0;
};

using LogDensity = std::function<double(const ParamVector&)>;

/// Random-walk Metropolis with an isotropic Gaussian proposal of the given
/// per-dimension stdev. log_target(theta_init) must be finite. Off-support
/// proposals (log target -inf) are rejected like any other.
PosteriorSamples rwm_sample(const LogDensity& log_target,
                            const ParamVector& theta_init, int steps,
                            double scale, Rng& rng);

struct GaussianPrior {
  Vector mean;
  Matrix cov;
};

/// Elliptical slice sampling for targets of the form
/// likelihood(theta) x N(theta; mean, cov). Rejection-free: every step ends
/// on an accepted point, so acceptance_rate is always 1. The prior must be
/// Gaussian by construction of this interface; anything else goes through
/// rwm_sample. The log_target trace holds log likelihood + log prior.
PosteriorSamples ess_sample(const LogDensity& log_likelihood,
                            const GaussianPrior& prior,
                            const ParamVector& theta_init, int steps, Rng& rng);

/// Columns: step, theta_1..theta_d, log_target, accepted.
void write_chain_csv(std::ostream& os, const PosteriorSamples& chain);

/// Drops the first `fraction` of the chain and thins the rest down to
/// n_out evenly spaced draws (fewer if the chain is too short).
std::vector<ParamVector> burn_and_thin(const PosteriorSamples& chain,
                                       double fraction, int n_out);

}  // namespace tsnl

#endif  // TSNL_MCMC_HPP
