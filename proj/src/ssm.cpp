#include "tsnl/ssm.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace tsnl {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

Trajectory simulate_trajectory(const SsmModel& model, const ParamVector& theta,
                               int T, Rng& rng, CostLedger& ledger) {
  if (T < 1) throw std::invalid_argument("simulate_trajectory: T must be >= 1");
  Trajectory traj;
  traj.states.reserve(T + 1);
  traj.observations.reserve(T);

  Vector x = model.sample_initial(theta, rng);
  if (!all_finite(x)) throw SimulationFailure(0, "non-finite initial state");
  traj.states.push_back(x);

  for (int t = 1; t <= T; ++t) {
    x = model.sample_transition(theta, x, rng, ledger);
    if (!all_finite(x)) {
      throw SimulationFailure(t, "non-finite state at t=" + std::to_string(t));
    }
    Vector y = model.sample_observation(theta, x, rng);
    if (!all_finite(y)) {
      throw SimulationFailure(t, "non-finite observation at t=" + std::to_string(t));
    }
    traj.states.push_back(x);
    traj.observations.push_back(std::move(y));
  }
  return traj;
}

LaggedDataset make_lagged_dataset(
    const std::vector<std::pair<ParamVector, Trajectory>>& trajectories, int L) {
  if (trajectories.empty()) {
    throw std::invalid_argument("make_lagged_dataset: empty input");
  }
  if (L < 1) throw std::invalid_argument("make_lagged_dataset: L must be >= 1");

  const int T = trajectories.front().second.length();
  const int d_y = static_cast<int>(trajectories.front().second.observations.front().size());

  LaggedDataset ds;
  ds.lag = L;
  ds.obs_dim = d_y;
  ds.n_groups = static_cast<int>(trajectories.size());
  ds.records.reserve(trajectories.size() * static_cast<std::size_t>(T));

  int group = 0;
  for (const auto& [theta, traj] : trajectories) {
    if (traj.length() != T) {
      throw std::invalid_argument("make_lagged_dataset: trajectories must share T");
    }
    const auto& y = traj.observations;
    for (int t = 1; t <= T; ++t) {
      LaggedRecord rec;
      rec.theta = theta;
      rec.window = Matrix::Zero(L, d_y);
      // row r holds y_{t-L+r}; indices < 1 stay zero
      for (int r = 0; r < L; ++r) {
        const int src = t - L + r;
        if (src >= 1) rec.window.row(r) = y[src - 1].transpose();
      }
      rec.target = y[t - 1];
      rec.group = group;
      ds.records.push_back(std::move(rec));
    }
    ++group;
  }
  return ds;
}

LaggedDataset make_sequence_dataset(
    const std::vector<std::pair<ParamVector, Trajectory>>& trajectories) {
  if (trajectories.empty()) {
    throw std::invalid_argument("make_sequence_dataset: empty input");
  }
  const int T = trajectories.front().second.length();
  const int d_y = static_cast<int>(trajectories.front().second.observations.front().size());

  LaggedDataset ds;
  ds.lag = 0;
  ds.obs_dim = T * d_y;
  ds.n_groups = static_cast<int>(trajectories.size());

  int group = 0;
  for (const auto& [theta, traj] : trajectories) {
    if (traj.length() != T) {
      throw std::invalid_argument("make_sequence_dataset: trajectories must share T");
    }
    LaggedRecord rec;
    rec.theta = theta;
    rec.window = Matrix::Zero(0, T * d_y);
    rec.target = Vector(T * d_y);
    for (int t = 0; t < T; ++t) {
      rec.target.segment(t * d_y, d_y) = traj.observations[t];
    }
    rec.group = group++;
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

std::vector<double> group_distances(const LaggedDataset& ds,
                                    const std::vector<Vector>& y_obs) {
  std::vector<double> sq(ds.n_groups, 0.0);
  std::vector<int> pos(ds.n_groups, 0);  // record index within each group
  const int d_y_raw = static_cast<int>(y_obs.front().size());
  for (const auto& rec : ds.records) {
    const int t = pos[rec.group]++;
    if (ds.lag == 0) {
      // whole-sequence record: target is the flattened trajectory
      for (std::size_t s = 0; s < y_obs.size(); ++s) {
        sq[rec.group] +=
            (rec.target.segment(s * d_y_raw, d_y_raw) - y_obs[s]).squaredNorm();
      }
    } else {
      sq[rec.group] += (rec.target - y_obs[t]).squaredNorm();
    }
  }
  for (auto& v : sq) v = std::sqrt(v);
  return sq;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int d_x = static_cast<int>(traj.states.front().size());
  const int d_y = traj.observations.empty()
                      ? 0
                      : static_cast<int>(traj.observations.front().size());
  os << "t";
  for (int i = 1; i <= d_x; ++i) os << ",x_" << i;
  for (int i = 1; i <= d_y; ++i) os << ",y_" << i;
  os << "\n";
  os.precision(17);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    os << t;
    for (int i = 0; i < d_x; ++i) os << "," << traj.states[t][i];
    for (int i = 0; i < d_y; ++i) {
      os << ",";
      if (t >= 1) os << traj.observations[t - 1][i];
    }
    os << "\n";
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string header;
  std::getline(is, header);
  int d_x = 0, d_y = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind("x_", 0) == 0) ++d_x;
      if (col.rfind("y_", 0) == 0) ++d_y;
    }
  }
  Trajectory traj;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const long t = std::stol(cell);
    Vector x(d_x);
    for (int i = 0; i < d_x; ++i) {
      std::getline(ss, cell, ',');
      x[i] = std::stod(cell);
    }
    traj.states.push_back(x);
    if (t >= 1) {
      Vector y(d_y);
      for (int i = 0; i < d_y; ++i) {
        std::getline(ss, cell, ',');
        y[i] = std::stod(cell);
      }
      traj.observations.push_back(y);
    }
  }
  return traj;
}

}  // namespace tsnl
