#include "tsnl/inference.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "tsnl/metrics.hpp"

namespace tsnl {

namespace {

Vector flatten_observations(const std::vector<Vector>& y) {
  const int d_y = static_cast<int>(y[0].size());
  Vector out(static_cast<int>(y.size()) * d_y);
  for (std::size_t t = 0; t < y.size(); ++t) {
    out.segment(static_cast<int>(t) * d_y, d_y) = y[t];
  }
  return out;
}

}  // namespace

double truncated_loglik(const ConditionalFlow& flow,
                        const std::vector<Vector>& y_obs,
                        const ParamVector& theta_context, int L) {
  const int T = static_cast<int>(y_obs.size());
  const int d_y = static_cast<int>(y_obs[0].size());
  const int d_th = static_cast<int>(theta_context.size());
  if (L < 1) throw std::invalid_argument("truncated_loglik: L must be >= 1");
  if (flow.event_dim() != d_y || flow.context_dim() != L * d_y + d_th) {
    throw std::invalid_argument("truncated_loglik: flow dimensions do not match");
  }
  Matrix events(T, d_y);
  Matrix ctx = Matrix::Zero(T, L * d_y + d_th);
  for (int t = 1; t <= T; ++t) {
    events.row(t - 1) = y_obs[t - 1].transpose();
    for (int r = 0; r < L; ++r) {
      const int src = t - L + r;  // window row r is y_{t-L+r}; earlier rows stay zero
      if (src >= 1) ctx.row(t - 1).segment(r * d_y, d_y) = y_obs[src - 1].transpose();
    }
    ctx.row(t - 1).segment(L * d_y, d_th) = theta_context.transpose();
  }
  return flow.log_prob(events, ctx).sum();
}

LaggedDataset build_round_dataset(Strategy strategy, const LaggedDataset& previous,
                                  const LaggedDataset& incoming,
                                  const std::vector<Vector>& y_obs, int n_keep) {
  if (strategy == Strategy::Last) return incoming;

  LaggedDataset u;
  if (previous.records.empty()) {
    u = incoming;
  } else {
    if (previous.lag != incoming.lag || previous.obs_dim != incoming.obs_dim) {
      throw std::invalid_argument("build_round_dataset: incompatible datasets");
    }
    u = previous;
    u.records.reserve(previous.records.size() + incoming.records.size());
    for (LaggedRecord rec : incoming.records) {
      rec.group += previous.n_groups;
      u.records.push_back(std::move(rec));
    }
    u.n_groups += incoming.n_groups;
  }
  if (strategy == Strategy::All) return u;

  // BEST: keep the n_keep closest trajectories
  if (u.n_groups <= n_keep) {
    if (u.n_groups < n_keep) {
      std::fprintf(stderr,
                   "build_round_dataset: only %d trajectories for BEST(N=%d), "
                   "keeping all\n",
                   u.n_groups, n_keep);
    }
    return u;
  }
  const std::vector<double> dist = group_distances(u, y_obs);
  std::vector<int> order(u.n_groups);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist[a] < dist[b]; });
  std::vector<int> new_id(u.n_groups, -1);
  std::vector<int> kept(order.begin(), order.begin() + n_keep);
  std::sort(kept.begin(), kept.end());
  for (int i = 0; i < n_keep; ++i) new_id[kept[i]] = i;

  LaggedDataset best;
  best.lag = u.lag;
  best.obs_dim = u.obs_dim;
  best.n_groups = n_keep;
  for (const auto& rec : u.records) {
    if (new_id[rec.group] < 0) continue;
    LaggedRecord r = rec;
    r.group = new_id[rec.group];
    best.records.push_back(std::move(r));
  }
  return best;
}

LagChoice select_lag(const std::vector<std::vector<Vector>>& sequences,
                     int L_max, double tau) {
  if (sequences.empty()) throw std::invalid_argument("select_lag: no sequences");
  if (static_cast<int>(sequences[0].size()) <= L_max) {
    throw std::invalid_argument("select_lag: need T > L_max");
  }
  LagChoice lc;
  lc.acf_curve.assign(L_max + 1, 0.0);
  for (const auto& seq : sequences) {
    for (int l = 0; l <= L_max; ++l) {
      lc.acf_curve[l] += acf_norm(seq, l) / static_cast<double>(sequences.size());
    }
  }
  if (lc.acf_curve[0] <= 0.0) {
    std::fprintf(stderr, "select_lag: constant sequence, defaulting to L=1\n");
    lc.L = 1;
    lc.degenerate = true;
    return lc;
  }
  lc.L = L_max;
  for (int l = 1; l <= L_max; ++l) {
    if (lc.acf_curve[l] < tau * lc.acf_curve[0]) {
      lc.L = l;
      break;
    }
  }
  return lc;
}

LagChoice select_lag(const std::vector<Vector>& y_obs, int L_max, double tau) {
  return select_lag(std::vector<std::vector<Vector>>{y_obs}, L_max, tau);
}

namespace {

double surrogate_loglik(const ConditionalFlow& flow,
                        const std::vector<Vector>& y_obs, const ParamVector& z,
                        int L) {
  if (L >= 1) return truncated_loglik(flow, y_obs, z, L);
  return flow.log_prob(flatten_observations(y_obs), z);
}

/// MCMC over the unconstrained scale against surrogate loglik + prior +
/// Jacobian, initialized at the best of the given candidates.
PosteriorSamples run_surrogate_mcmc(const LogDensity& loglik_z, const Prior& prior,
                                    const ParamTransform& transform,
                                    const McmcConfig& cfg,
                                    const std::vector<ParamVector>& init_candidates,
                                    Rng& rng) {
  const LogDensity full_target = [&](const ParamVector& z) {
    const ParamVector th = transform.to_constrained(z);
    const double lp = prior.log_density(th);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return loglik_z(z) + lp + transform.log_jacobian(z);
  };
  ParamVector best;
  double best_v = -std::numeric_limits<double>::infinity();
  for (const auto& cand : init_candidates) {
    const double v = full_target(cand);
    if (v > best_v) {
      best_v = v;
      best = cand;
    }
  }
  if (!std::isfinite(best_v)) {
    throw NumericalError("surrogate mcmc: no finite initial point");
  }
  if (cfg.kind == McmcKind::Ess) {
    if (!cfg.z_prior) {
      throw std::invalid_argument(
          "ess requires the exact Gaussian form of the unconstrained prior; "
          "use rwm otherwise");
    }
    return ess_sample(loglik_z, *cfg.z_prior, best, cfg.steps, rng);
  }
  return rwm_sample(full_target, best, cfg.steps, cfg.scale, rng);
}

InferenceResult run_rounds(const SsmModel& model, const Prior& prior,
                           const ParamTransform& transform,
                           const std::vector<Vector>& y_obs, int L, int R, int N,
                           Strategy strategy, const FlowConfig& flow_cfg,
                           const TrainConfig& train_cfg, const McmcConfig& mcmc_cfg,
                           Rng& rng, CostLedger& ledger) {
  if (R < 1 || N < 1) throw std::invalid_argument("run_rounds: R, N must be >= 1");
  const int T = static_cast<int>(y_obs.size());
  const int d_y = static_cast<int>(y_obs[0].size());
  const int d_th = transform.dim();
  const int event_dim = L >= 1 ? d_y : T * d_y;
  const int context_dim = L >= 1 ? L * d_y + d_th : d_th;

  InferenceResult out;
  out.lag = L >= 1 ? L : 0;
  LaggedDataset dataset;
  std::shared_ptr<ConditionalFlow> flow;
  std::vector<ParamVector> last_zs;  // previous round's simulated parameters

  for (int r = 0; r < R; ++r) {
    RoundDiagnostics diag;
    diag.round = r;

    std::vector<ParamVector> zs;
    std::vector<ParamVector> retry_pool;
    if (r == 0) {
      for (int n = 0; n < N; ++n) {
        zs.push_back(transform.to_unconstrained(prior.sample(rng)));
      }
    } else {
      const LogDensity loglik = [&](const ParamVector& z) {
        return surrogate_loglik(*flow, y_obs, z, L);
      };
      const PosteriorSamples chain =
          run_surrogate_mcmc(loglik, prior, transform, mcmc_cfg, last_zs, rng);
      diag.acceptance_rate = chain.acceptance_rate;
      zs = burn_and_thin(chain, mcmc_cfg.burn_in, N);
      const int lo = static_cast<int>(mcmc_cfg.burn_in * chain.samples.size());
      retry_pool.assign(chain.samples.begin() + lo, chain.samples.end());
    }

    std::vector<std::pair<ParamVector, Trajectory>> sims;
    for (int n = 0; n < N; ++n) {
      ParamVector z = zs[n];
      for (int attempt = 0;; ++attempt) {
        if (attempt > 1000) {
          throw SimulationFailure(-1, "run_rounds: repeated simulation failures");
        }
        try {
          Trajectory traj =
              simulate_trajectory(model, transform.to_constrained(z), T, rng, ledger);
          sims.emplace_back(z, std::move(traj));
          break;
        } catch (const SimulationFailure&) {
          ++diag.n_sim_failures;
          if (r == 0 || retry_pool.empty()) {
            z = transform.to_unconstrained(prior.sample(rng));
          } else {
            std::uniform_int_distribution<std::size_t> pick(0, retry_pool.size() - 1);
            z = retry_pool[pick(rng)];
          }
        }
      }
      diag.proposals.push_back(transform.to_constrained(sims.back().first));
    }
    last_zs.clear();
    for (const auto& s : sims) last_zs.push_back(s.first);

    const LaggedDataset new_ds =
        L >= 1 ? make_lagged_dataset(sims, L) : make_sequence_dataset(sims);
    dataset = build_round_dataset(strategy, dataset, new_ds, y_obs, N);

    TrainTrace trace;
    std::shared_ptr<ConditionalFlow> trained;
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        auto f = std::make_shared<ConditionalFlow>(event_dim, context_dim,
                                                   flow_cfg, rng);
        trace = train_flow(*f, dataset, train_cfg, rng);
        trained = std::move(f);
        break;
      } catch (const TrainingFailure& e) {
        if (attempt == 1) {
          throw TrainingFailure("round " + std::to_string(r) +
                                " failed twice: " + e.what());
        }
        std::fprintf(stderr, "round %d: %s; retrying with fresh init\n", r,
                     e.what());
      }
    }
    flow = trained;
    diag.flow = trained;
    diag.train_trace = trace;
    diag.train_loss = trace.train_loss[trace.best_epoch];
    diag.val_loss = trace.val_loss[trace.best_epoch];
    diag.cumulative_cost = ledger.dynamics_calls();
    out.rounds.push_back(std::move(diag));
  }

  const LogDensity loglik = [&](const ParamVector& z) {
    return surrogate_loglik(*flow, y_obs, z, L);
  };
  PosteriorSamples chain =
      run_surrogate_mcmc(loglik, prior, transform, mcmc_cfg, last_zs, rng);
  for (auto& s : chain.samples) s = transform.to_constrained(s);
  out.posterior = std::move(chain);
  out.final_flow = flow;
  return out;
}

}  // namespace

InferenceResult tsnl_run(const SsmModel& model, const Prior& prior,
                         const ParamTransform& transform,
                         const std::vector<Vector>& y_obs, int L, int rounds,
                         int n_per_round, Strategy strategy,
                         const FlowConfig& flow_cfg, const TrainConfig& train_cfg,
                         const McmcConfig& mcmc_cfg, Rng& rng, CostLedger& ledger) {
  if (L < 1) throw std::invalid_argument("tsnl_run: L must be >= 1");
  return run_rounds(model, prior, transform, y_obs, L, rounds, n_per_round,
                    strategy, flow_cfg, train_cfg, mcmc_cfg, rng, ledger);
}

InferenceResult snl_run(const SsmModel& model, const Prior& prior,
                        const ParamTransform& transform,
                        const std::vector<Vector>& y_obs, int rounds,
                        int n_per_round, Strategy strategy,
                        const FlowConfig& flow_cfg, const TrainConfig& train_cfg,
                        const McmcConfig& mcmc_cfg, Rng& rng, CostLedger& ledger) {
  return run_rounds(model, prior, transform, y_obs, 0, rounds, n_per_round,
                    strategy, flow_cfg, train_cfg, mcmc_cfg, rng, ledger);
}

PosteriorSamples amortized_extend(const ConditionalFlow& flow, const Prior& prior,
                                  const ParamTransform& transform,
                                  const std::vector<Vector>& y_extended, int L,
                                  const McmcConfig& mcmc_cfg, Rng& rng) {
  const int d_y = static_cast<int>(y_extended[0].size());
  const int d_th = transform.dim();
  if (L < 1 || flow.event_dim() != d_y ||
      flow.context_dim() != L * d_y + d_th) {
    throw std::invalid_argument("amortized_extend: flow does not match L/d_y/d_theta");
  }
  const Vector params_before = flow.parameters();

  const LogDensity loglik = [&](const ParamVector& z) {
    return truncated_loglik(flow, y_extended, z, L);
  };
  std::vector<ParamVector> candidates;
  for (int i = 0; i < 64; ++i) {
    candidates.push_back(transform.to_unconstrained(prior.sample(rng)));
  }
  PosteriorSamples chain =
      run_surrogate_mcmc(loglik, prior, transform, mcmc_cfg, candidates, rng);
  for (auto& s : chain.samples) s = transform.to_constrained(s);

  if ((flow.parameters() - params_before).norm() != 0.0) {
    throw NumericalError("amortized_extend: flow parameters changed");
  }
  return chain;
}

void write_round_diagnostics_csv(std::ostream& os,
                                 const std::vector<RoundDiagnostics>& rounds) {
  os << "round,train_loss,val_loss,acceptance_rate,cumulative_cost\n";
  os.precision(17);
  for (const auto& d : rounds) {
    os << d.round << ',' << d.train_loss << ',' << d.val_loss << ','
       << d.acceptance_rate << ',' << d.cumulative_cost << '\n';
  }
}

}  // namespace tsnl
