#ifndef TSNL_INFERENCE_HPP
#define TSNL_INFERENCE_HPP

#include <iosfwd>
#include <memory>
#include <optional>

#include "tsnl/mcmc.hpp"
#include "tsnl/nde/train.hpp"
#include "tsnl/ssm.hpp"
#include "tsnl/transforms.hpp"

namespace tsnl {

enum class Strategy { All, Last, Best };

enum class McmcKind { Rwm, Ess };

struct McmcConfig {
  McmcKind kind = McmcKind::Rwm;
  int steps = 1000;
  double burn_in = 0.2;  // fraction discarded before thinning
  double scale = 0.1;    // rwm proposal stdev on the unconstrained scale
  // exact Gaussian density of the prior on the unconstrained scale; required
  // for elliptical slice sampling, ignored by rwm
  std::optional<GaussianPrior> z_prior;
};

struct LagChoice {
  int L = 1;
  std::vector<double> acf_curve;  // ||C_l||_F for l = 0..L_max, averaged
  bool degenerate = false;        // constant input: curve[0] == 0
};

struct RoundDiagnostics {
  int round = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double acceptance_rate = 1.0;
  std::uint64_t cumulative_cost = 0;
  int n_sim_failures = 0;
  std::vector<ParamVector> proposals;     // natural scale
  std::shared_ptr<ConditionalFlow> flow;  // flow trained in this round
  TrainTrace train_trace;
};

struct InferenceResult {
  PosteriorSamples posterior;  // natural scale
  std::vector<RoundDiagnostics> rounds;
  std::shared_ptr<ConditionalFlow> final_flow;
  int lag = 0;  // 0 for snl
};

/// Sum over t of the flow's conditional log density of y_t given the L
/// preceding observations (zero-padded before t=1) and theta_context.
/// theta_context must be on the scale the flow was trained with.
double truncated_loglik(const ConditionalFlow& flow,
                        const std::vector<Vector>& y_obs,
                        const ParamVector& theta_context, int L);

/// ALL: union of previous and incoming records. LAST: incoming only.
/// BEST: keep the records of the n_keep trajectories (across both sets)
/// whose simulated observations lie closest to y_obs in Euclidean distance;
/// if fewer trajectories exist, keep all and warn.
LaggedDataset build_round_dataset(Strategy strategy, const LaggedDataset& previous,
                                  const LaggedDataset& incoming,
                                  const std::vector<Vector>& y_obs, int n_keep);

/// Smallest L in 1..L_max whose averaged ||C_L||_F falls below
/// tau * ||C_0||_F, else L_max. Constant sequences return L=1 with the
/// degenerate flag set.
LagChoice select_lag(const std::vector<std::vector<Vector>>& sequences,
                     int L_max, double tau = 0.2);
LagChoice select_lag(const std::vector<Vector>& y_obs, int L_max,
                     double tau = 0.2);

/// Truncated sequential neural likelihood. Per round: propose parameters
/// (round 0 from the prior, later rounds by MCMC on the current surrogate
/// posterior), simulate, extend the lagged dataset per the strategy, train a
/// fresh flow, and finally sample the last surrogate posterior. Failed
/// simulations are replaced and logged; a failed training run is retried
/// once with a fresh initialization.
InferenceResult tsnl_run(const SsmModel& model, const Prior& prior,
                         const ParamTransform& transform,
                         const std::vector<Vector>& y_obs, int L, int rounds,
                         int n_per_round, Strategy strategy,
                         const FlowConfig& flow_cfg, const TrainConfig& train_cfg,
                         const McmcConfig& mcmc_cfg, Rng& rng, CostLedger& ledger);

/// Same loop with whole sequences as events: the flow models
/// q(y_{1:T} | theta) with event dimension T x d_y and one record per
/// simulation.
InferenceResult snl_run(const SsmModel& model, const Prior& prior,
                        const ParamTransform& transform,
                        const std::vector<Vector>& y_obs, int rounds,
                        int n_per_round, Strategy strategy,
                        const FlowConfig& flow_cfg, const TrainConfig& train_cfg,
                        const McmcConfig& mcmc_cfg, Rng& rng, CostLedger& ledger);

/// Re-runs MCMC against an already-trained flow on an extended observation
/// sequence. No training happens; the flow parameter checksum is asserted
/// unchanged.
PosteriorSamples amortized_extend(const ConditionalFlow& flow, const Prior& prior,
                                  const ParamTransform& transform,
                                  const std::vector<Vector>& y_extended, int L,
                                  const McmcConfig& mcmc_cfg, Rng& rng);

/// CSV columns: round, train_loss, val_loss, acceptance_rate, cumulative_cost.
void write_round_diagnostics_csv(std::ostream& os,
                                 const std::vector<RoundDiagnostics>& rounds);

}  // namespace tsnl

#endif  // TSNL_INFERENCE_HPP
