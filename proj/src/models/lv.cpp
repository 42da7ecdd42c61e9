#include "tsnl/models/lv.hpp"

#include <cmath>

namespace tsnl {

namespace {

// One Gillespie step of duration spec.grid_dt starting from (n_pred, n_prey).
void gillespie_step(const LvSpec& spec, long& n_pred, long& n_prey, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  std::uint64_t events = 0;
  for (;;) {
    const double na = static_cast<double>(n_pred);
    const double nb = static_cast<double>(n_prey);
    const double a1 = spec.rates[0] * na * nb;
    const double a2 = spec.rates[1] * na * nb;
    const double a3 = spec.rates[2] * nb;
    const double a4 = spec.rates[3] * na;
    const double a0 = a1 + a2 + a3 + a4;
    if (a0 <= 0.0) return;  // absorbing state, nothing fires

    // exponential waiting time
    const double u = unif(rng);
    t += -std::log1p(-u) / a0;
    if (t > spec.grid_dt) return;

    if (++events > spec.max_events_per_step) {
      throw SimulationFailure(-1, "lv: event count exceeded max_events_per_step");
    }
    const double r = unif(rng) * a0;
    if (r < a1) {
      ++n_pred;
      --n_prey;
    } else if (r < a1 + a2) {
      --n_prey;
    } else if (r < a1 + a2 + a3) {
      ++n_prey;
    } else {
      --n_pred;
    }
  }
}

}  // namespace

Vector LvModel::sample_initial(const ParamVector& theta, Rng& rng) const {
  (void)rng;
  const LvSpec s = bound(theta);
  Vector x(2);
  x << static_cast<double>(s.n_pred0), static_cast<double>(s.n_prey0);
  return x;
}

Vector LvModel::sample_transition(const ParamVector& theta, const Vector& x_prev,
                                  Rng& rng, CostLedger& ledger) const {
  const LvSpec s = bound(theta);
  long n_pred = static_cast<long>(std::llround(x_prev[0]));
  long n_prey = static_cast<long>(std::llround(x_prev[1]));
  ledger.add();
  gillespie_step(s, n_pred, n_prey, rng);
  Vector x(2);
  x << static_cast<double>(n_pred), static_cast<double>(n_prey);
  return x;
}

Vector LvModel::sample_observation(const ParamVector& theta, const Vector& x,
                                   Rng& rng) const {
  const LvSpec s = bound(theta);
  Vector y(1);
  y[0] = gauss_sample(x[1], s.sigma_e, rng);
  return y;
}

double LvModel::observation_loglik(const ParamVector& theta, const Vector& x,
                                   const Vector& y) const {
  const LvSpec s = bound(theta);
  if (s.sigma_e <= 0.0) {
    return y[0] == x[1] ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return gauss_logpdf(y[0], x[1], s.sigma_e * s.sigma_e);
}

Trajectory gillespie_simulate(const LvSpec& spec, int T, Rng& rng,
                              CostLedger& ledger) {
  Trajectory traj;
  long n_pred = spec.n_pred0;
  long n_prey = spec.n_prey0;
  Vector x(2);
  x << static_cast<double>(n_pred), static_cast<double>(n_prey);
  traj.states.push_back(x);
  for (int t = 1; t <= T; ++t) {
    ledger.add();
    gillespie_step(spec, n_pred, n_prey, rng);
    x << static_cast<double>(n_pred), static_cast<double>(n_prey);
    traj.states.push_back(x);
  }
  return traj;
}

std::vector<Vector> lv_observe(const Trajectory& traj, double sigma_e, Rng& rng) {
  std::vector<Vector> obs;
  obs.reserve(traj.states.size() - 1);
  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    Vector y(1);
    y[0] = gauss_sample(traj.states[t][1], sigma_e, rng);
    obs.push_back(y);
  }
  return obs;
}

}  // namespace tsnl
