#ifndef TSNL_EXPERIMENT_HPP
#define TSNL_EXPERIMENT_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsnl/abc.hpp"
#include "tsnl/inference.hpp"
#include "tsnl/particle.hpp"

namespace tsnl {

struct TsnlSettings {
  int lag = 0;  // 0: choose by the acf rule on y_obs
  int lag_max = 30;
  double tau = 0.2;
  int rounds = 3;
  Strategy strategy = Strategy::All;
};

struct SnlSettings {
  int rounds = 3;
  Strategy strategy = Strategy::All;
};

struct BpfSettings {
  int n_particles = 500;
  double proposal_scale = 0.25;
};

struct VallossSettings {
  std::vector<int> t_grid = {10, 20, 40};
  int n_sims = 50;  // simulations per surrogate, fixed across T
  int lag = 1;      // truncation window for the per-step surrogate
};

/// Everything the harness needs for one run, defaults filled by parse_config.
/// Budget semantics: total dynamics calls per run. tsnl/snl divide it into
/// rounds x simulations of length T; bpf-mcmc into chain steps of cost
/// n_particles x T; smc-abc stops starting new populations once past it.
struct ExperimentConfig {
  std::string model = "lgssm1d";
  std::vector<std::string> methods = {"tsnl"};
  int T = 100;
  std::vector<std::uint64_t> budgets = {2000};
  int trials = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  std::optional<ParamVector> theta_gt;  // model default when absent
  FlowConfig flow;
  TrainConfig train;
  McmcConfig mcmc;
  TsnlSettings tsnl;
  SnlSettings snl;
  BpfSettings bpf;
  AbcConfig abc;
  VallossSettings valloss;
};

/// Reads the JSON config file. Missing keys fall back to defaults; unknown
/// keys anywhere in the tree raise ConfigError naming the key; so do type
/// and range violations (budgets must be strictly increasing, trials >= 1).
ExperimentConfig parse_config(const std::string& path);

/// A benchmark model bundled with its prior, parameter transform and ground
/// truth. z_prior is the exact unconstrained-scale prior when it happens to
/// be Gaussian (lgssm1d), enabling elliptical slice sampling.
struct ModelSetup {
  std::string name;
  std::shared_ptr<SsmModel> model;
  Prior prior;
  ParamTransform transform;
  std::optional<GaussianPrior> z_prior;
  ParamVector theta_gt;
  std::vector<std::string> param_names;
};

/// lgssm1d | sv2d | lv; anything else raises ConfigError("model", ...).
ModelSetup make_model_setup(const std::string& name);

struct ResultRow {
  std::string method;
  std::uint64_t budget = 0;  // ledger reading of the run, not the target
  int trial = 0;
  double e_kde = 0.0;
  double e_min = 0.0;
  double bias = 0.0;
  double stdev = 0.0;
  std::vector<int> rank;  // per theta dimension, ';'-joined in the CSV
  double seconds = 0.0;
  std::uint64_t seed = 0;
  int failed = 0;
};

/// Columns: method,budget,trial,e_kde,e_min,bias,stdev,rank,seconds,seed,failed.
void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);

/// methods x budgets x trials. y_obs is simulated once per trial from the
/// ground truth and shared across methods and budgets; each run gets its own
/// seed-derived stream. A failed run yields a NaN row flagged failed=1 and
/// the sweep continues. Writes results.csv, error-vs-cost charts and rank
/// histograms (largest budget) under cfg.out_dir.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

struct VallossRow {
  std::string method;  // snl | tsnl
  int T = 0;
  int trial = 0;
  double val_loss = 0.0;          // snl: per sequence; tsnl: per step
  double val_loss_per_seq = 0.0;  // tsnl: val_loss x T, for same-unit plots
  std::uint64_t seed = 0;
  int failed = 0;
};

void write_valloss_csv(std::ostream& os, const std::vector<VallossRow>& rows);

/// Trains one SNL and one T-SNL surrogate per (T, trial) on fresh
/// prior-predictive data with N = cfg.valloss.n_sims and records the
/// validation loss at the best epoch. Writes valloss.csv and two charts
/// (native units and per-sequence units) under cfg.out_dir.
std::vector<VallossRow> run_valloss_study(const ExperimentConfig& cfg);

}  // namespace tsnl

#endif  // TSNL_EXPERIMENT_HPP
