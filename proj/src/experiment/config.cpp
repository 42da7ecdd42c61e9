#include <fstream>
#include <set>
#include <string>

#include "json.hpp"
#include "tsnl/experiment.hpp"

namespace tsnl {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw ConfigError(key, "config: " + key + ": " + msg);
}

void expect_keys(const json& obj, const std::string& scope,
                 std::set<std::string> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      const std::string full = scope.empty() ? it.key() : scope + "." + it.key();
      bad(full, "unknown key");
    }
  }
}

double get_num(const json& obj, const std::string& scope, const std::string& key,
               double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) bad(scope + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& scope, const std::string& key,
            int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) bad(scope + key, "expected an integer");
  return obj[key].get<int>();
}

std::string get_str(const json& obj, const std::string& scope,
                    const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) bad(scope + key, "expected a string");
  return obj[key].get<std::string>();
}

Strategy parse_strategy(const std::string& s, const std::string& key) {
  if (s == "all") return Strategy::All;
  if (s == "last") return Strategy::Last;
  if (s == "best") return Strategy::Best;
  bad(key, "expected all|last|best, got '" + s + "'");
}

const std::set<std::string> kMethods = {"tsnl", "snl", "smc-abc", "bpf-mcmc"};

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad(path, "cannot open file");
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    bad(path, std::string("parse error: ") + e.what());
  }
  if (!root.is_object()) bad(path, "top level must be an object");

  expect_keys(root, "",
              {"model", "method", "methods", "T", "budgets", "trials", "seed",
               "out", "theta_gt", "flow", "train", "mcmc", "tsnl", "snl", "bpf",
               "abc", "valloss"});

  ExperimentConfig cfg;
  if (!root.contains("model")) bad("model", "missing key");
  cfg.model = get_str(root, "", "model", cfg.model);

  if (root.contains("method") && root.contains("methods")) {
    bad("method", "give either 'method' or 'methods', not both");
  }
  if (root.contains("method")) {
    cfg.methods = {get_str(root, "", "method", "tsnl")};
  } else if (root.contains("methods")) {
    if (!root["methods"].is_array()) bad("methods", "expected an array");
    cfg.methods.clear();
    for (const auto& m : root["methods"]) {
      if (!m.is_string()) bad("methods", "expected strings");
      cfg.methods.push_back(m.get<std::string>());
    }
    if (cfg.methods.empty()) bad("methods", "must not be empty");
  }
  for (const auto& m : cfg.methods) {
    if (!kMethods.count(m)) bad("method", "unknown method '" + m + "'");
  }

  cfg.T = get_int(root, "", "T", cfg.T);
  if (cfg.T < 1) bad("T", "must be >= 1");

  if (root.contains("budgets")) {
    if (!root["budgets"].is_array()) bad("budgets", "expected an array");
    cfg.budgets.clear();
    for (const auto& b : root["budgets"]) {
      if (!b.is_number_integer() || b.get<long long>() <= 0) {
        bad("budgets", "expected positive integers");
      }
      cfg.budgets.push_back(b.get<std::uint64_t>());
    }
    if (cfg.budgets.empty()) bad("budgets", "must not be empty");
    for (std::size_t i = 1; i < cfg.budgets.size(); ++i) {
      if (cfg.budgets[i] <= cfg.budgets[i - 1]) {
        bad("budgets", "must be strictly increasing");
      }
    }
  }

  cfg.trials = get_int(root, "", "trials", cfg.trials);
  if (cfg.trials < 1) bad("trials", "must be >= 1");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) bad("seed", "expected an integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  cfg.out_dir = get_str(root, "", "out", cfg.out_dir);

  if (root.contains("theta_gt")) {
    if (!root["theta_gt"].is_array()) bad("theta_gt", "expected an array");
    ParamVector th(root["theta_gt"].size());
    int i = 0;
    for (const auto& v : root["theta_gt"]) {
      if (!v.is_number()) bad("theta_gt", "expected numbers");
      th[i++] = v.get<double>();
    }
    cfg.theta_gt = th;
  }

  if (root.contains("flow")) {
    const json& f = root["flow"];
    if (!f.is_object()) bad("flow", "expected an object");
    expect_keys(f, "flow", {"n_made", "n_hidden_layers", "hidden_units",
                            "activation"});
    cfg.flow.n_made = get_int(f, "flow.", "n_made", cfg.flow.n_made);
    cfg.flow.n_hidden_layers =
        get_int(f, "flow.", "n_hidden_layers", cfg.flow.n_hidden_layers);
    cfg.flow.hidden_units =
        get_int(f, "flow.", "hidden_units", cfg.flow.hidden_units);
    const std::string act = get_str(f, "flow.", "activation", "tanh");
    if (act == "tanh") {
      cfg.flow.activation = Activation::Tanh;
    } else if (act == "relu") {
      cfg.flow.activation = Activation::Relu;
    } else {
      bad("flow.activation", "expected tanh|relu, got '" + act + "'");
    }
    if (cfg.flow.n_made < 1 || cfg.flow.n_hidden_layers < 1 ||
        cfg.flow.hidden_units < 1) {
      bad("flow", "layer counts and widths must be >= 1");
    }
  }

  if (root.contains("train")) {
    const json& t = root["train"];
    if (!t.is_object()) bad("train", "expected an object");
    expect_keys(t, "train",
                {"learning_rate", "batch_size", "max_epochs", "patience",
                 "validation_fraction"});
    cfg.train.learning_rate =
        get_num(t, "train.", "learning_rate", cfg.train.learning_rate);
    cfg.train.batch_size = get_int(t, "train.", "batch_size", cfg.train.batch_size);
    cfg.train.max_epochs = get_int(t, "train.", "max_epochs", cfg.train.max_epochs);
    cfg.train.patience = get_int(t, "train.", "patience", cfg.train.patience);
    cfg.train.validation_fraction = get_num(t, "train.", "validation_fraction",
                                            cfg.train.validation_fraction);
    if (cfg.train.learning_rate <= 0) bad("train.learning_rate", "must be > 0");
    if (cfg.train.max_epochs < 1) bad("train.max_epochs", "must be >= 1");
    if (cfg.train.validation_fraction <= 0 || cfg.train.validation_fraction >= 1) {
      bad("train.validation_fraction", "must lie in (0, 1)");
    }
  }

  if (root.contains("mcmc")) {
    const json& m = root["mcmc"];
    if (!m.is_object()) bad("mcmc", "expected an object");
    expect_keys(m, "mcmc", {"kind", "steps", "burn_in", "scale"});
    const std::string kind = get_str(m, "mcmc.", "kind", "rwm");
    if (kind == "rwm") {
      cfg.mcmc.kind = McmcKind::Rwm;
    } else if (kind == "ess") {
      cfg.mcmc.kind = McmcKind::Ess;
    } else {
      bad("mcmc.kind", "expected rwm|ess, got '" + kind + "'");
    }
    cfg.mcmc.steps = get_int(m, "mcmc.", "steps", cfg.mcmc.steps);
    cfg.mcmc.burn_in = get_num(m, "mcmc.", "burn_in", cfg.mcmc.burn_in);
    cfg.mcmc.scale = get_num(m, "mcmc.", "scale", cfg.mcmc.scale);
    if (cfg.mcmc.steps < 1) bad("mcmc.steps", "must be >= 1");
    if (cfg.mcmc.burn_in < 0 || cfg.mcmc.burn_in >= 1) {
      bad("mcmc.burn_in", "must lie in [0, 1)");
    }
    if (cfg.mcmc.scale <= 0) bad("mcmc.scale", "must be > 0");
  }

  if (root.contains("tsnl")) {
    const json& t = root["tsnl"];
    if (!t.is_object()) bad("tsnl", "expected an object");
    expect_keys(t, "tsnl", {"lag", "lag_max", "tau", "rounds", "strategy"});
    cfg.tsnl.lag = get_int(t, "tsnl.", "lag", cfg.tsnl.lag);
    cfg.tsnl.lag_max = get_int(t, "tsnl.", "lag_max", cfg.tsnl.lag_max);
    cfg.tsnl.tau = get_num(t, "tsnl.", "tau", cfg.tsnl.tau);
    cfg.tsnl.rounds = get_int(t, "tsnl.", "rounds", cfg.tsnl.rounds);
    cfg.tsnl.strategy = parse_strategy(
        get_str(t, "tsnl.", "strategy", "all"), "tsnl.strategy");
    if (cfg.tsnl.lag < 0) bad("tsnl.lag", "must be >= 0 (0 = automatic)");
    if (cfg.tsnl.lag_max < 1) bad("tsnl.lag_max", "must be >= 1");
    if (cfg.tsnl.tau <= 0 || cfg.tsnl.tau > 1) bad("tsnl.tau", "must lie in (0, 1]");
    if (cfg.tsnl.rounds < 1) bad("tsnl.rounds", "must be >= 1");
  }

  if (root.contains("snl")) {
    const json& s = root["snl"];
    if (!s.is_object()) bad("snl", "expected an object");
    expect_keys(s, "snl", {"rounds", "strategy"});
    cfg.snl.rounds = get_int(s, "snl.", "rounds", cfg.snl.rounds);
    cfg.snl.strategy =
        parse_strategy(get_str(s, "snl.", "strategy", "all"), "snl.strategy");
    if (cfg.snl.rounds < 1) bad("snl.rounds", "must be >= 1");
  }

  if (root.contains("bpf")) {
    const json& b = root["bpf"];
    if (!b.is_object()) bad("bpf", "expected an object");
    expect_keys(b, "bpf", {"n_particles", "proposal_scale"});
    cfg.bpf.n_particles = get_int(b, "bpf.", "n_particles", cfg.bpf.n_particles);
    cfg.bpf.proposal_scale =
        get_num(b, "bpf.", "proposal_scale", cfg.bpf.proposal_scale);
    if (cfg.bpf.n_particles < 1) bad("bpf.n_particles", "must be >= 1");
    if (cfg.bpf.proposal_scale <= 0) bad("bpf.proposal_scale", "must be > 0");
  }

  if (root.contains("abc")) {
    const json& a = root["abc"];
    if (!a.is_object()) bad("abc", "expected an object");
    expect_keys(a, "abc",
                {"n_particles", "ess_frac", "ratio_cap", "stop_delta",
                 "min_accept_rate", "max_populations"});
    cfg.abc.n_particles = get_int(a, "abc.", "n_particles", cfg.abc.n_particles);
    cfg.abc.ess_frac = get_num(a, "abc.", "ess_frac", cfg.abc.ess_frac);
    cfg.abc.ratio_cap = get_num(a, "abc.", "ratio_cap", cfg.abc.ratio_cap);
    cfg.abc.stop_delta = get_num(a, "abc.", "stop_delta", cfg.abc.stop_delta);
    cfg.abc.min_accept_rate =
        get_num(a, "abc.", "min_accept_rate", cfg.abc.min_accept_rate);
    cfg.abc.max_populations =
        get_int(a, "abc.", "max_populations", cfg.abc.max_populations);
    if (cfg.abc.n_particles < 2) bad("abc.n_particles", "must be >= 2");
    if (cfg.abc.ess_frac <= 0 || cfg.abc.ess_frac > 1) {
      bad("abc.ess_frac", "must lie in (0, 1]");
    }
    if (cfg.abc.ratio_cap <= 1) bad("abc.ratio_cap", "must be > 1");
    if (cfg.abc.min_accept_rate <= 0 || cfg.abc.min_accept_rate > 1) {
      bad("abc.min_accept_rate", "must lie in (0, 1]");
    }
    if (cfg.abc.max_populations < 1) bad("abc.max_populations", "must be >= 1");
  }

  if (root.contains("valloss")) {
    const json& v = root["valloss"];
    if (!v.is_object()) bad("valloss", "expected an object");
    expect_keys(v, "valloss", {"T_grid", "n_sims", "lag"});
    if (v.contains("T_grid")) {
      if (!v["T_grid"].is_array()) bad("valloss.T_grid", "expected an array");
      cfg.valloss.t_grid.clear();
      for (const auto& t : v["T_grid"]) {
        if (!t.is_number_integer() || t.get<int>() < 2) {
          bad("valloss.T_grid", "expected integers >= 2");
        }
        cfg.valloss.t_grid.push_back(t.get<int>());
      }
      if (cfg.valloss.t_grid.empty()) bad("valloss.T_grid", "must not be empty");
      for (std::size_t i = 1; i < cfg.valloss.t_grid.size(); ++i) {
        if (cfg.valloss.t_grid[i] <= cfg.valloss.t_grid[i - 1]) {
          bad("valloss.T_grid", "must be strictly increasing");
        }
      }
    }
    cfg.valloss.n_sims = get_int(v, "valloss.", "n_sims", cfg.valloss.n_sims);
    cfg.valloss.lag = get_int(v, "valloss.", "lag", cfg.valloss.lag);
    if (cfg.valloss.n_sims < 2) bad("valloss.n_sims", "must be >= 2");
    if (cfg.valloss.lag < 1) bad("valloss.lag", "must be >= 1");
  }

  return cfg;
}

}  // namespace tsnl
