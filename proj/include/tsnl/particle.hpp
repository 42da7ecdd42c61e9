#ifndef TSNL_PARTICLE_HPP
#define TSNL_PARTICLE_HPP

#include "tsnl/mcmc.hpp"
#include "tsnl/ssm.hpp"
#include "tsnl/transforms.hpp"

namespace tsnl {

struct BpfConfig {
  int n_particles = 500;  // resampling is multinomial, every step
};

/// Bootstrap particle filter estimate of log p(y_{1:T} | theta):
/// sum over t of log mean observation density, multinomial resampling after
/// every step. Returns -inf when all weights vanish at some t. Adds
/// n_particles x T to the ledger.
double bpf_loglik(const SsmModel& model, const ParamVector& theta,
                  const std::vector<Vector>& y, const BpfConfig& cfg, Rng& rng,
                  CostLedger& ledger);

/// Pseudo-marginal random-walk Metropolis with the BPF estimate as the
/// likelihood. The chain moves on the unconstrained scale given by the
/// transform; samples are returned on the natural scale. The likelihood
/// estimate of the current state is stored and never recomputed.
PosteriorSamples bpf_mcmc(const SsmModel& model, const Prior& prior,
                          const ParamTransform& transform,
                          const std::vector<Vector>& y, int steps,
                          double proposal_scale, const BpfConfig& cfg, Rng& rng,
                          CostLedger& ledger);

}  // namespace tsnl

#endif  // TSNL_PARTICLE_HPP
