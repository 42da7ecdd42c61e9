#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsnl/experiment.hpp"
#include "tsnl/metrics.hpp"
#include "tsnl/models/lgssm.hpp"

namespace {

using namespace tsnl;

void write_samples_csv(const std::string& path,
                       const std::vector<ParamVector>& samples,
                       const std::vector<std::string>& names) {
  std::ofstream os(path);
  for (std::size_t i = 0; i < names.size(); ++i) {
    os << (i ? "," : "") << names[i];
  }
  os << '\n';
  os.precision(17);
  for (const auto& s : samples) {
    for (int j = 0; j < s.size(); ++j) os << (j ? "," : "") << s[j];
    os << '\n';
  }
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const ModelSetup setup = make_model_setup(cfg.model);
  std::filesystem::create_directories(cfg.out_dir);
  Rng rng = make_stream(cfg.seed, 1000000000ull);
  CostLedger ledger;
  const Trajectory traj =
      simulate_trajectory(*setup.model, setup.theta_gt, cfg.T, rng, ledger);
  const std::string path = cfg.out_dir + "/trajectory.csv";
  std::ofstream os(path);
  write_trajectory_csv(os, traj);
  std::printf("simulated %s for T=%d (%llu dynamics calls) -> %s\n",
              setup.name.c_str(), cfg.T,
              static_cast<unsigned long long>(ledger.dynamics_calls()),
              path.c_str());
  return 0;
}

int cmd_acf(const ExperimentConfig& cfg) {
  const ModelSetup setup = make_model_setup(cfg.model);
  std::filesystem::create_directories(cfg.out_dir);
  Rng rng = make_stream(cfg.seed, 1000000000ull);
  CostLedger ledger;
  const std::vector<Vector> y =
      simulate_trajectory(*setup.model, setup.theta_gt, cfg.T, rng, ledger)
          .observations;
  const int lmax = std::max(1, std::min(cfg.tsnl.lag_max, cfg.T - 1));
  const LagChoice choice = select_lag(y, lmax, cfg.tsnl.tau);
  const std::string path = cfg.out_dir + "/acf.csv";
  std::ofstream os(path);
  os << "lag,acf_norm\n";
  os.precision(17);
  for (std::size_t l = 0; l < choice.acf_curve.size(); ++l) {
    os << l << ',' << choice.acf_curve[l] << '\n';
  }
  std::printf("selected lag L=%d (tau=%g, L_max=%d%s) -> %s\n", choice.L,
              cfg.tsnl.tau, lmax, choice.degenerate ? ", degenerate" : "",
              path.c_str());
  return 0;
}

int cmd_infer(const ExperimentConfig& cfg) {
  const ModelSetup setup = make_model_setup(cfg.model);
  const std::string method = cfg.methods.front();
  const std::uint64_t budget = cfg.budgets.back();
  std::filesystem::create_directories(cfg.out_dir);

  // streams match trial 0 of a one-method, one-budget benchmark
  Rng obs_rng = make_stream(cfg.seed, 1000000000ull);
  CostLedger obs_ledger;
  const std::vector<Vector> y_obs =
      simulate_trajectory(*setup.model, setup.theta_gt, cfg.T, obs_rng,
                          obs_ledger)
          .observations;
  Rng rng = make_stream(cfg.seed, 1001001ull);

  McmcConfig mc = cfg.mcmc;
  if (mc.kind == McmcKind::Ess) {
    if (!setup.z_prior) {
      throw ConfigError("mcmc.kind",
                        "config: mcmc.kind: ess needs a Gaussian unconstrained "
                        "prior; model '" + setup.name + "' has none, use rwm");
    }
    mc.z_prior = setup.z_prior;
  }

  const int T = cfg.T;
  CostLedger ledger;
  std::vector<ParamVector> samples;

  if (method == "tsnl" || method == "snl") {
    InferenceResult res;
    if (method == "tsnl") {
      int L = cfg.tsnl.lag;
      if (L == 0) {
        L = select_lag(y_obs, std::max(1, std::min(cfg.tsnl.lag_max, T - 1)),
                       cfg.tsnl.tau)
                .L;
      }
      const int N = static_cast<int>(std::max<std::uint64_t>(
          1, budget / (static_cast<std::uint64_t>(T) * cfg.tsnl.rounds)));
      std::fprintf(stderr, "infer: tsnl L=%d rounds=%d sims/round=%d\n", L,
                   cfg.tsnl.rounds, N);
      res = tsnl_run(*setup.model, setup.prior, setup.transform, y_obs, L,
                     cfg.tsnl.rounds, N, cfg.tsnl.strategy, cfg.flow, cfg.train,
                     mc, rng, ledger);
    } else {
      const int N = static_cast<int>(std::max<std::uint64_t>(
          1, budget / (static_cast<std::uint64_t>(T) * cfg.snl.rounds)));
      std::fprintf(stderr, "infer: snl rounds=%d sims/round=%d\n",
                   cfg.snl.rounds, N);
      res = snl_run(*setup.model, setup.prior, setup.transform, y_obs,
                    cfg.snl.rounds, N, cfg.snl.strategy, cfg.flow, cfg.train,
                    mc, rng, ledger);
    }
    samples = burn_and_thin(res.posterior, mc.burn_in, 1000);
    std::ofstream rs(cfg.out_dir + "/rounds.csv");
    write_round_diagnostics_csv(rs, res.rounds);
    std::ofstream ch(cfg.out_dir + "/chain.csv");
    write_chain_csv(ch, res.posterior);
  } else if (method == "bpf-mcmc") {
    BpfConfig bc;
    bc.n_particles = cfg.bpf.n_particles;
    const int steps = static_cast<int>(std::max<std::uint64_t>(
        1, budget / (static_cast<std::uint64_t>(bc.n_particles) * T)));
    std::fprintf(stderr, "infer: bpf-mcmc steps=%d particles=%d\n", steps,
                 bc.n_particles);
    const PosteriorSamples chain =
        bpf_mcmc(*setup.model, setup.prior, setup.transform, y_obs, steps,
                 cfg.bpf.proposal_scale, bc, rng, ledger);
    samples = burn_and_thin(chain, mc.burn_in, 1000);
    std::ofstream ch(cfg.out_dir + "/chain.csv");
    write_chain_csv(ch, chain);
  } else {  // smc-abc
    AbcConfig ac = cfg.abc;
    ac.max_dynamics_calls = budget;
    const AbcResult res =
        smc_abc_run(*setup.model, setup.prior, y_obs, ac, rng, ledger);
    std::fprintf(stderr, "infer: smc-abc stopped: %s after %zu populations\n",
                 res.stop_reason.c_str(), res.trace.size());
    samples = res.resample_equal(1000, rng);
    std::ofstream tr(cfg.out_dir + "/abc_trace.csv");
    write_abc_trace_csv(tr, res.trace);
  }

  write_samples_csv(cfg.out_dir + "/posterior_samples.csv", samples,
                    setup.param_names);
  const MetricReport rep =
      evaluate_posterior(samples, setup.theta_gt, ledger.dynamics_calls(), rng);
  std::printf(
      "%s on %s: cost=%llu e_kde=%.4f e_min=%.4f bias=%.4f stdev=%.4f -> %s\n",
      method.c_str(), setup.name.c_str(),
      static_cast<unsigned long long>(rep.cost), rep.e_kde, rep.e_min, rep.bias,
      rep.stdev, cfg.out_dir.c_str());
  return 0;
}

int cmd_benchmark(const ExperimentConfig& cfg) {
  const std::vector<ResultRow> rows = run_experiment(cfg);
  int failed = 0;
  for (const auto& r : rows) failed += r.failed;
  std::printf("benchmark: %zu rows (%d failed) -> %s/results.csv\n", rows.size(),
              failed, cfg.out_dir.c_str());
  return 0;
}

int cmd_valloss(const ExperimentConfig& cfg) {
  const std::vector<VallossRow> rows = run_valloss_study(cfg);
  int failed = 0;
  for (const auto& r : rows) failed += r.failed;
  std::printf("valloss: %zu rows (%d failed) -> %s/valloss.csv\n", rows.size(),
              failed, cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated sequential neural likelihood for state-space models"};
  app.require_subcommand(1);

  std::string config_path, out_dir, method;
  long long seed = -1, budget = -1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "root RNG seed (overrides config)");
    sub->add_option("--out", out_dir, "output directory (overrides config)");
  };
  auto add_method = [&](CLI::App* sub) {
    sub->add_option("--method", method, "method (overrides config)")
        ->check(CLI::IsMember({"tsnl", "snl", "smc-abc", "bpf-mcmc"}));
    sub->add_option("--budget", budget,
                    "dynamics-call budget (overrides config)")
        ->check(CLI::PositiveNumber);
  };

  auto* sim = app.add_subcommand(
      "simulate", "simulate a ground-truth trajectory and write it as CSV");
  add_common(sim);
  auto* inf = app.add_subcommand(
      "infer", "run one inference method once and write posterior samples");
  add_common(inf);
  add_method(inf);
  auto* acf = app.add_subcommand(
      "acf", "autocovariance norms of a simulated sequence and the chosen lag");
  add_common(acf);
  auto* bench = app.add_subcommand(
      "benchmark", "methods x budgets x trials sweep with CSV and charts");
  add_common(bench);
  add_method(bench);
  auto* val = app.add_subcommand(
      "valloss", "validation-loss-vs-T study for the snl and tsnl surrogates");
  add_common(val);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!method.empty()) cfg.methods = {method};
    if (budget > 0) cfg.budgets = {static_cast<std::uint64_t>(budget)};

    if (sim->parsed()) return cmd_simulate(cfg);
    if (inf->parsed()) return cmd_infer(cfg);
    if (acf->parsed()) return cmd_acf(cfg);
    if (bench->parsed()) return cmd_benchmark(cfg);
    if (val->parsed()) return cmd_valloss(cfg);
  } catch (const tsnl::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
