#ifndef TSNL_MODELS_LV_HPP
#define TSNL_MODELS_LV_HPP

#include <array>
#include <cstdint>
#include <functional>

#include "tsnl/ssm.hpp"

namespace tsnl {

/// Lotka-Volterra predator-prey reaction network with species A (predator)
/// and B (prey) and mass-action propensities
///   a_1 = rho_1 n_A n_B   (A + B -> 2A)
///   a_2 = rho_2 n_A n_B   (A + B -> A)
///   a_3 = rho_3 n_B       (B -> 2B)
///   a_4 = rho_4 n_A       (A -> 0)
/// States are recorded on a regular grid of spacing grid_dt; observations are
/// noisy prey counts y_t = n_B + e, e ~ N(0, sigma_e^2).
struct LvSpec {
  std::array<double, 4> rates{0.01, 0.01, 0.8, 0.4};
  long n_pred0 = 50;
  long n_prey0 = 100;
  double grid_dt = 0.2;
  double sigma_e = 10.0;
  // Runaway-population guard: exceeding this many events within one grid step
  // aborts the trajectory as a simulation failure.
  std::uint64_t max_events_per_step = 200000;
};

class LvModel : public SsmModel {
 public:
  using SpecBinder = std::function<LvSpec(LvSpec, const ParamVector&)>;

  explicit LvModel(LvSpec base, SpecBinder binder = nullptr)
      : base_(std::move(base)), binder_(std::move(binder)) {}

  int state_dim() const override { return 2; }
  int obs_dim() const override { return 1; }

  LvSpec bound(const ParamVector& theta) const {
    return binder_ ? binder_(base_, theta) : base_;
  }

  Vector sample_initial(const ParamVector& theta, Rng& rng) const override;
  /// Advances the reaction network by one grid step (duration grid_dt) with
  /// the Gillespie algorithm. Counts as one dynamics call.
  Vector sample_transition(const ParamVector& theta, const Vector& x_prev,
                           Rng& rng, CostLedger& ledger) const override;
  Vector sample_observation(const ParamVector& theta, const Vector& x,
                            Rng& rng) const override;
  double observation_loglik(const ParamVector& theta, const Vector& x,
                            const Vector& y) const override;

 private:
  LvSpec base_;
  SpecBinder binder_;
};

/// Simulates T grid steps of the reaction network (states only; no
/// observation noise). Adds T to the ledger, one count per grid step.
Trajectory gillespie_simulate(const LvSpec& spec, int T, Rng& rng,
                              CostLedger& ledger);

/// Attaches noisy prey observations y_t = n_B,t + N(0, sigma_e^2) to a
/// simulated trajectory.
std::vector<Vector> lv_observe(const Trajectory& traj, double sigma_e, Rng& rng);

}  // namespace tsnl

#endif  // TSNL_MODELS_LV_HPP
