#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "tsnl/experiment.hpp"
#include "tsnl/metrics.hpp"
#include "tsnl/svg.hpp"

namespace tsnl {

namespace {

constexpr int kPosteriorDraws = 1000;
constexpr int kRankSubsample = 100;  // "100 samples in 10 bins"
constexpr int kRankBins = 10;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Vector> simulate_observations(const ModelSetup& setup, int T,
                                          Rng& rng) {
  CostLedger scratch;  // ground-truth data is free; ledgers track inference only
  return simulate_trajectory(*setup.model, setup.theta_gt, T, rng, scratch)
      .observations;
}

McmcConfig mcmc_with_prior(const ExperimentConfig& cfg, const ModelSetup& setup) {
  McmcConfig mc = cfg.mcmc;
  if (mc.kind == McmcKind::Ess) mc.z_prior = setup.z_prior;
  return mc;
}

std::vector<ParamVector> subsample_even(const std::vector<ParamVector>& samples,
                                        int k) {
  const int n = static_cast<int>(samples.size());
  std::vector<ParamVector> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(samples[(i + 1) * n / k - 1]);
  return out;
}

struct RunOutput {
  std::vector<ParamVector> samples;
  std::uint64_t cost = 0;
};

RunOutput run_method(const ExperimentConfig& cfg, const ModelSetup& setup,
                     const std::string& method, std::uint64_t budget,
                     const std::vector<Vector>& y_obs, Rng& rng) {
  const int T = static_cast<int>(y_obs.size());
  CostLedger ledger;
  RunOutput out;
  const McmcConfig mc = mcmc_with_prior(cfg, setup);

  if (method == "tsnl") {
    int L = cfg.tsnl.lag;
    if (L == 0) {
      const int lmax = std::min(cfg.tsnl.lag_max, T - 1);
      L = select_lag(y_obs, std::max(1, lmax), cfg.tsnl.tau).L;
    }
    const int R = cfg.tsnl.rounds;
    const int n_per_round = static_cast<int>(std::max<std::uint64_t>(
        1, budget / (static_cast<std::uint64_t>(T) * R)));
    const InferenceResult res =
        tsnl_run(*setup.model, setup.prior, setup.transform, y_obs, L, R,
                 n_per_round, cfg.tsnl.strategy, cfg.flow, cfg.train, mc, rng,
                 ledger);
    out.samples = burn_and_thin(res.posterior, mc.burn_in, kPosteriorDraws);
  } else if (method == "snl") {
    const int R = cfg.snl.rounds;
    const int n_per_round = static_cast<int>(std::max<std::uint64_t>(
        1, budget / (static_cast<std::uint64_t>(T) * R)));
    const InferenceResult res =
        snl_run(*setup.model, setup.prior, setup.transform, y_obs, R,
                n_per_round, cfg.snl.strategy, cfg.flow, cfg.train, mc, rng,
                ledger);
    out.samples = burn_and_thin(res.posterior, mc.burn_in, kPosteriorDraws);
  } else if (method == "bpf-mcmc") {
    BpfConfig bc;
    bc.n_particles = cfg.bpf.n_particles;
    const int steps = static_cast<int>(std::max<std::uint64_t>(
        1, budget / (static_cast<std::uint64_t>(bc.n_particles) * T)));
    const PosteriorSamples chain =
        bpf_mcmc(*setup.model, setup.prior, setup.transform, y_obs, steps,
                 cfg.bpf.proposal_scale, bc, rng, ledger);
    out.samples = burn_and_thin(chain, mc.burn_in, kPosteriorDraws);
  } else if (method == "smc-abc") {
    AbcConfig ac = cfg.abc;
    ac.max_dynamics_calls = budget;
    const AbcResult res =
        smc_abc_run(*setup.model, setup.prior, y_obs, ac, rng, ledger);
    out.samples = res.resample_equal(kPosteriorDraws, rng);
  } else {
    throw ConfigError("method", "config: method: unknown method '" + method + "'");
  }
  out.cost = ledger.dynamics_calls();
  return out;
}

std::string join_rank(const std::vector<int>& rank) {
  std::string s;
  for (std::size_t i = 0; i < rank.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(rank[i]);
  }
  return s;
}

}  // namespace

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "method,budget,trial,e_kde,e_min,bias,stdev,rank,seconds,seed,failed\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.method << ',' << r.budget << ',' << r.trial << ',' << r.e_kde << ','
       << r.e_min << ',' << r.bias << ',' << r.stdev << ',' << join_rank(r.rank)
       << ',' << r.seconds << ',' << r.seed << ',' << r.failed << '\n';
  }
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  const ModelSetup setup = make_model_setup(cfg.model);
  if (cfg.mcmc.kind == McmcKind::Ess && !setup.z_prior) {
    throw ConfigError("mcmc.kind",
                      "config: mcmc.kind: ess needs a Gaussian unconstrained "
                      "prior; model '" + setup.name + "' has none, use rwm");
  }
  std::filesystem::create_directories(cfg.out_dir);

  // one observation sequence per trial, shared by every method and budget
  std::vector<std::vector<Vector>> obs(cfg.trials);
  for (int t = 0; t < cfg.trials; ++t) {
    Rng obs_rng = make_stream(cfg.seed, 1000000000ull + t);
    obs[t] = simulate_observations(setup, cfg.T, obs_rng);
  }

  const int d = static_cast<int>(setup.theta_gt.size());
  const int n_budgets = static_cast<int>(cfg.budgets.size());
  std::vector<ResultRow> rows;

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const std::string& method = cfg.methods[mi];
    for (int bi = 0; bi < n_budgets; ++bi) {
      for (int t = 0; t < cfg.trials; ++t) {
        Rng rng = make_stream(cfg.seed, (mi + 1) * 1000000ull +
                                            (bi + 1) * 1000ull + (t + 1));
        ResultRow row;
        row.method = method;
        row.trial = t;
        row.seed = cfg.seed;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const RunOutput run =
              run_method(cfg, setup, method, cfg.budgets[bi], obs[t], rng);
          MetricReport rep =
              evaluate_posterior(run.samples, setup.theta_gt, run.cost, rng);
          if (static_cast<int>(run.samples.size()) >= kRankSubsample) {
            rep.rank = rank_statistic(
                subsample_even(run.samples, kRankSubsample), setup.theta_gt, rng);
          }
          row.budget = run.cost;
          row.e_kde = rep.e_kde;
          row.e_min = rep.e_min;
          row.bias = rep.bias;
          row.stdev = rep.stdev;
          row.rank = rep.rank;
        } catch (const std::exception& e) {
          std::fprintf(stderr,
                       "run failed (method=%s budget=%llu trial=%d): %s\n",
                       method.c_str(),
                       static_cast<unsigned long long>(cfg.budgets[bi]), t,
                       e.what());
          row.budget = cfg.budgets[bi];
          row.e_kde = row.e_min = row.bias = row.stdev = kNaN;
          row.rank.assign(d, -1);
          row.failed = 1;
        }
        row.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        std::fprintf(stderr, "[bench] %s budget=%llu trial=%d: %s in %.1fs\n",
                     method.c_str(),
                     static_cast<unsigned long long>(cfg.budgets[bi]), t,
                     row.failed ? "FAILED" : "ok", row.seconds);
        rows.push_back(std::move(row));
      }
    }
  }

  {
    std::ofstream os(cfg.out_dir + "/results.csv");
    write_results_csv(os, rows);
  }

  // error-vs-cost charts: per method, mean over surviving trials per budget
  const char* metric_names[4] = {"e_kde", "e_min", "bias", "stdev"};
  for (int m = 0; m < 4; ++m) {
    std::vector<Series> series;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      Series s;
      s.label = cfg.methods[mi];
      for (int bi = 0; bi < n_budgets; ++bi) {
        double sum_x = 0, sum_y = 0;
        int n = 0;
        for (int t = 0; t < cfg.trials; ++t) {
          const ResultRow& r = rows[(mi * n_budgets + bi) * cfg.trials + t];
          if (r.failed) continue;
          const double v = m == 0   ? r.e_kde
                           : m == 1 ? r.e_min
                           : m == 2 ? r.bias
                                    : r.stdev;
          sum_x += static_cast<double>(r.budget);
          sum_y += v;
          ++n;
        }
        if (n > 0) s.points.emplace_back(sum_x / n, sum_y / n);
      }
      if (!s.points.empty()) series.push_back(std::move(s));
    }
    write_line_chart(cfg.out_dir + "/error_vs_cost_" + metric_names[m] + ".svg",
                     std::string(metric_names[m]) + " vs simulation cost",
                     "dynamics calls", metric_names[m], series,
                     /*log_x=*/true, /*log_y=*/false);
  }

  // rank histograms at the largest budget
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (int dim = 0; dim < d; ++dim) {
      std::vector<double> bins(kRankBins, 0.0);
      int n = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const ResultRow& r =
            rows[(mi * n_budgets + (n_budgets - 1)) * cfg.trials + t];
        if (r.failed || dim >= static_cast<int>(r.rank.size())) continue;
        const int b = std::min(kRankBins - 1,
                               r.rank[dim] * kRankBins / (kRankSubsample + 1));
        bins[std::max(0, b)] += 1.0;
        ++n;
      }
      write_bar_chart(cfg.out_dir + "/rank_hist_" + cfg.methods[mi] + "_" +
                          setup.param_names[dim] + ".svg",
                      "rank of " + setup.param_names[dim] + " (" +
                          cfg.methods[mi] + ")",
                      bins, static_cast<double>(n) / kRankBins);
    }
  }
  return rows;
}

void write_valloss_csv(std::ostream& os, const std::vector<VallossRow>& rows) {
  os << "method,T,trial,val_loss,val_loss_per_seq,seed,failed\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.method << ',' << r.T << ',' << r.trial << ',' << r.val_loss << ','
       << r.val_loss_per_seq << ',' << r.seed << ',' << r.failed << '\n';
  }
}

std::vector<VallossRow> run_valloss_study(const ExperimentConfig& cfg) {
  const ModelSetup setup = make_model_setup(cfg.model);
  std::filesystem::create_directories(cfg.out_dir);
  const int d_theta = static_cast<int>(setup.theta_gt.size());
  const int d_y = setup.model->obs_dim();
  std::vector<VallossRow> rows;

  for (int T : cfg.valloss.t_grid) {
    for (int t = 0; t < cfg.trials; ++t) {
      Rng rng = make_stream(cfg.seed, 2000000000ull +
                                          static_cast<std::uint64_t>(T) * 1000ull +
                                          (t + 1));
      VallossRow snl_row{"snl", T, t, kNaN, kNaN, cfg.seed, 0};
      VallossRow tsnl_row{"tsnl", T, t, kNaN, kNaN, cfg.seed, 0};
      CostLedger scratch;
      std::vector<std::pair<ParamVector, Trajectory>> pairs;
      bool data_ok = true;
      for (int i = 0; i < cfg.valloss.n_sims && data_ok; ++i) {
        int attempts = 0;
        for (;;) {
          if (++attempts > 1000) {
            data_ok = false;
            break;
          }
          const ParamVector theta = setup.prior.sample(rng);
          try {
            Trajectory traj =
                simulate_trajectory(*setup.model, theta, T, rng, scratch);
            pairs.emplace_back(setup.transform.to_unconstrained(theta),
                               std::move(traj));
            break;
          } catch (const SimulationFailure&) {
          }
        }
      }
      if (!data_ok) {
        std::fprintf(stderr, "valloss: data simulation failed at T=%d trial=%d\n",
                     T, t);
        snl_row.failed = tsnl_row.failed = 1;
        rows.push_back(snl_row);
        rows.push_back(tsnl_row);
        continue;
      }

      auto fit = [&](const LaggedDataset& data, int event_dim,
                     int context_dim) -> double {
        for (int attempt = 0;; ++attempt) {
          ConditionalFlow flow(event_dim, context_dim, cfg.flow, rng);
          try {
            const TrainTrace trace = train_flow(flow, data, cfg.train, rng);
            return trace.val_loss[trace.best_epoch];
          } catch (const TrainingFailure&) {
            if (attempt >= 1) throw;
          }
        }
      };

      try {
        const double loss =
            fit(make_sequence_dataset(pairs), T * d_y, d_theta);
        snl_row.val_loss = loss;
        snl_row.val_loss_per_seq = loss;
      } catch (const std::exception& e) {
        std::fprintf(stderr, "valloss: snl failed at T=%d trial=%d: %s\n", T, t,
                     e.what());
        snl_row.failed = 1;
      }
      try {
        const int L = std::min(cfg.valloss.lag, T - 1);
        const double loss = fit(make_lagged_dataset(pairs, L), d_y,
                                L * d_y + d_theta);
        tsnl_row.val_loss = loss;
        tsnl_row.val_loss_per_seq = loss * T;
      } catch (const std::exception& e) {
        std::fprintf(stderr, "valloss: tsnl failed at T=%d trial=%d: %s\n", T, t,
                     e.what());
        tsnl_row.failed = 1;
      }
      std::fprintf(stderr, "[valloss] T=%d trial=%d: snl=%.3f tsnl=%.3f\n", T, t,
                   snl_row.val_loss, tsnl_row.val_loss);
      rows.push_back(snl_row);
      rows.push_back(tsnl_row);
    }
  }

  {
    std::ofstream os(cfg.out_dir + "/valloss.csv");
    write_valloss_csv(os, rows);
  }

  auto mean_series = [&](const std::string& method, bool per_seq,
                         const std::string& label) {
    Series s;
    s.label = label;
    for (int T : cfg.valloss.t_grid) {
      double sum = 0;
      int n = 0;
      for (const auto& r : rows) {
        if (r.method != method || r.T != T || r.failed) continue;
        sum += per_seq ? r.val_loss_per_seq : r.val_loss;
        ++n;
      }
      if (n > 0) s.points.emplace_back(T, sum / n);
    }
    return s;
  };
  write_line_chart(cfg.out_dir + "/valloss.svg", "validation loss vs T", "T",
                   "validation loss",
                   {mean_series("snl", false, "snl (per sequence)"),
                    mean_series("tsnl", false, "tsnl (per step)")},
                   false, false);
  write_line_chart(cfg.out_dir + "/valloss_per_sequence.svg",
                   "per-sequence validation loss vs T", "T",
                   "validation loss x T",
                   {mean_series("snl", true, "snl"),
                    mean_series("tsnl", true, "tsnl x T")},
                   false, false);
  return rows;
}

}  // namespace tsnl
