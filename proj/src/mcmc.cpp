#include "tsnl/mcmc.hpp"

#include <cassert>
#include <cmath>
#include <ostream>

namespace tsnl {

PosteriorSamples rwm_sample(const LogDensity& log_target,
                            const ParamVector& theta_init, int steps,
                            double scale, Rng& rng) {
  double lt = log_target(theta_init);
  if (!std::isfinite(lt)) {
    throw std::invalid_argument("rwm_sample: log target not finite at init");
  }
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PosteriorSamples out;
  out.samples.reserve(steps);
  ParamVector theta = theta_init;
  int n_acc = 0;
  for (int s = 0; s < steps; ++s) {
    ParamVector prop(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
      prop[i] = theta[i] + scale * stdnorm(rng);
    }
    const double lt_prop = log_target(prop);
    const bool acc = std::log(unif(rng)) < lt_prop - lt;
    if (acc) {
      theta = prop;
      lt = lt_prop;
      ++n_acc;
    }
    out.samples.push_back(theta);
    out.log_target.push_back(lt);
    out.accepted.push_back(acc ? 1 : 0);
  }
  out.acceptance_rate = steps > 0 ? static_cast<double>(n_acc) / steps : 0.0;
  return out;
}

PosteriorSamples ess_sample(const LogDensity& log_likelihood,
                            const GaussianPrior& prior,
                            const ParamVector& theta_init, int steps, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PosteriorSamples out;
  out.samples.reserve(steps);
  ParamVector theta = theta_init;
  double ll = log_likelihood(theta);
  if (!std::isfinite(ll)) {
    throw std::invalid_argument("ess_sample: log likelihood not finite at init");
  }
  for (int s = 0; s < steps; ++s) {
    const Vector nu = mvn_sample(Vector::Zero(theta.size()), prior.cov, rng);
    const double log_y = ll + std::log(unif(rng));
    double phi = 2.0 * M_PI * unif(rng);
    double phi_min = phi - 2.0 * M_PI;
    double phi_max = phi;
    for (;;) {
      const ParamVector cand = prior.mean +
                               (theta - prior.mean) * std::cos(phi) +
                               nu * std::sin(phi);
      const double ll_cand = log_likelihood(cand);
      if (ll_cand > log_y) {
        theta = cand;
        ll = ll_cand;
        break;
      }
      if (phi < 0.0) {
        phi_min = phi;
      } else {
        phi_max = phi;
      }
      phi = phi_min + (phi_max - phi_min) * unif(rng);
    }
    assert(ll > log_y);
    out.samples.push_back(theta);
    out.log_target.push_back(ll + mvn_logpdf(theta, prior.mean, prior.cov));
    out.accepted.push_back(1);
  }
  out.acceptance_rate = 1.0;
  return out;
}

void write_chain_csv(std::ostream& os, const PosteriorSamples& chain) {
  const int d = chain.samples.empty() ? 0 : static_cast<int>(chain.samples[0].size());
  os << "step";
  for (int j = 1; j <= d; ++j) os << ",theta_" << j;
  os << ",log_target,accepted\n";
  os.precision(17);
  for (std::size_t s = 0; s < chain.samples.size(); ++s) {
    os << s;
    for (int j = 0; j < d; ++j) os << ',' << chain.samples[s][j];
    os << ',' << chain.log_target[s] << ',' << chain.accepted[s] << '\n';
  }
}

std::vector<ParamVector> burn_and_thin(const PosteriorSamples& chain,
                                       double fraction, int n_out) {
  const int n = static_cast<int>(chain.samples.size());
  const int lo = static_cast<int>(fraction * n);
  const int kept = n - lo;
  std::vector<ParamVector> out;
  if (kept <= 0) return out;
  const int take = std::min(n_out, kept);
  for (int i = 0; i < take; ++i) {
    // evenly spaced through the retained stretch, ending on the last draw
    const int j = lo + ((i + 1) * kept) / take - 1;
    out.push_back(chain.samples[j]);
  }
  return out;
}

}  // namespace tsnl
