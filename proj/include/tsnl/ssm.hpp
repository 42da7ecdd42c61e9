#ifndef TSNL_SSM_HPP
#define TSNL_SSM_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "tsnl/common.hpp"

namespace tsnl {

/// Prior over the static parameters: density, sampler and support predicate.
/// log_density is -inf exactly off support; the sampler only produces
/// in-support points.
struct Prior {
  std::function<double(const ParamVector&)> log_density;
  std::function<ParamVector(Rng&)> sample;
  std::function<bool(const ParamVector&)> support;
};

/// One simulator run: latent states x_0..x_T and observations y_1..y_T.
struct Trajectory {
  std::vector<Vector> states;        // length T+1
  std::vector<Vector> observations;  // length T

  int length() const { return static_cast<int>(observations.size()); }
};

/// Counts draws from the transition model. This is the simulation-cost unit
/// shared by every inference method: cost = sum over simulations of their T.
class CostLedger {
 public:
  void add(std::uint64_t n = 1) { calls_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t dynamics_calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> calls_{0};
};

inline std::uint64_t simulation_cost(const CostLedger& ledger) {
  return ledger.dynamics_calls();
}

/// State-space model: initial, transition and observation samplers, all
/// parameterized by theta. sample_transition increments the ledger on every
/// call; nothing else touches it.
class SsmModel {
 public:
  virtual ~SsmModel() = default;

  virtual int state_dim() const = 0;
  virtual int obs_dim() const = 0;

  virtual Vector sample_initial(const ParamVector& theta, Rng& rng) const = 0;
  virtual Vector sample_transition(const ParamVector& theta, const Vector& x_prev,
                                   Rng& rng, CostLedger& ledger) const = 0;
  virtual Vector sample_observation(const ParamVector& theta, const Vector& x,
                                    Rng& rng) const = 0;

  /// log p(y | x, theta); needed by the particle filter.
  virtual double observation_loglik(const ParamVector& theta, const Vector& x,
                                    const Vector& y) const = 0;
};

/// Runs the model forward for T steps. Throws SimulationFailure (carrying the
/// offending time index) if any draw is non-finite. Adds exactly T to the
/// ledger on success.
Trajectory simulate_trajectory(const SsmModel& model, const ParamVector& theta,
                               int T, Rng& rng, CostLedger& ledger);

/// One (theta, window, target) training record. The window holds the L
/// observations before the target, one row per time step, oldest first;
/// rows that would fall before t=1 are zero.
struct LaggedRecord {
  ParamVector theta;
  Matrix window;  // L x d_y
  Vector target;  // d_y
  int group;      // index of the originating trajectory
};

struct LaggedDataset {
  std::vector<LaggedRecord> records;
  int lag = 0;
  int obs_dim = 0;
  int n_groups = 0;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

/// Builds the lagged dataset: N x T records, one per (trajectory, time step).
/// All trajectories must share T and d_y. Throws std::invalid_argument on
/// empty input.
LaggedDataset make_lagged_dataset(
    const std::vector<std::pair<ParamVector, Trajectory>>& trajectories, int L);

/// Whole-sequence dataset used by SNL: one record per trajectory whose target
/// is the flattened observation sequence (lag 0, empty window).
LaggedDataset make_sequence_dataset(
    const std::vector<std::pair<ParamVector, Trajectory>>& trajectories);

/// Euclidean distance of each group's simulated observations to y_obs,
/// recovered from the records' targets (targets in time order reproduce
/// y_{1:T} exactly).
std::vector<double> group_distances(const LaggedDataset& ds,
                                    const std::vector<Vector>& y_obs);

/// CSV with columns t, x_1..x_{d_x}, y_1..y_{d_y}; the t=0 row has empty y
/// cells.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

}  // namespace tsnl

#endif  // TSNL_SSM_HPP
