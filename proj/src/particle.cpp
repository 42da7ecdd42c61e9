#include "tsnl/particle.hpp"

#include <cmath>
#include <cstdio>

namespace tsnl {

double bpf_loglik(const SsmModel& model, const ParamVector& theta,
                  const std::vector<Vector>& y, const BpfConfig& cfg, Rng& rng,
                  CostLedger& ledger) {
  const int Np = cfg.n_particles;
  if (Np < 1) throw std::invalid_argument("bpf_loglik: n_particles < 1");
  std::vector<Vector> particles(Np);
  for (int i = 0; i < Np; ++i) particles[i] = model.sample_initial(theta, rng);

  double ll = 0.0;
  Vector logw(Np);
  std::vector<Vector> propagated(Np);
  for (const Vector& yt : y) {
    for (int i = 0; i < Np; ++i) {
      propagated[i] = model.sample_transition(theta, particles[i], rng, ledger);
      logw[i] = model.observation_loglik(theta, propagated[i], yt);
    }
    const double lse = log_sum_exp(logw);
    if (!std::isfinite(lse)) {
      return -std::numeric_limits<double>::infinity();
    }
    ll += lse - std::log(static_cast<double>(Np));

    const Vector w = (logw.array() - logw.maxCoeff()).exp();
    std::discrete_distribution<int> pick(w.data(), w.data() + Np);
    for (int i = 0; i < Np; ++i) particles[i] = propagated[pick(rng)];
  }
  return ll;
}

PosteriorSamples bpf_mcmc(const SsmModel& model, const Prior& prior,
                          const ParamTransform& transform,
                          const std::vector<Vector>& y, int steps,
                          double proposal_scale, const BpfConfig& cfg, Rng& rng,
                          CostLedger& ledger) {
  const ParamVector theta0 = prior.sample(rng);
  ParamVector z = transform.to_unconstrained(theta0);
  ParamVector theta = theta0;
  double log_prior = prior.log_density(theta) + transform.log_jacobian(z);
  double ll = bpf_loglik(model, theta, y, cfg, rng, ledger);

  std::normal_distribution<double> stdnorm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PosteriorSamples out;
  out.samples.reserve(steps);
  int n_acc = 0;
  for (int s = 0; s < steps; ++s) {
    ParamVector z_prop(z.size());
    for (int i = 0; i < z.size(); ++i) {
      z_prop[i] = z[i] + proposal_scale * stdnorm(rng);
    }
    const ParamVector theta_prop = transform.to_constrained(z_prop);
    const double lp_prop =
        prior.log_density(theta_prop) + transform.log_jacobian(z_prop);
    bool acc = false;
    if (std::isfinite(lp_prop)) {
      // fresh estimate for the proposal only; the current state keeps its own
      const double ll_prop = bpf_loglik(model, theta_prop, y, cfg, rng, ledger);
      acc = std::log(unif(rng)) < (ll_prop + lp_prop) - (ll + log_prior);
      if (acc) {
        z = z_prop;
        theta = theta_prop;
        ll = ll_prop;
        log_prior = lp_prop;
        ++n_acc;
      }
    }
    out.samples.push_back(theta);
    out.log_target.push_back(ll + log_prior);
    out.accepted.push_back(acc ? 1 : 0);
  }
  out.acceptance_rate = steps > 0 ? static_cast<double>(n_acc) / steps : 0.0;
  if (n_acc == 0) {
    std::fprintf(stderr, "bpf_mcmc: no accepted moves in %d steps\n", steps);
  }
  return out;
}

}  // namespace tsnl
