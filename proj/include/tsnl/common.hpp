#ifndef TSNL_COMMON_HPP
#define TSNL_COMMON_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace tsnl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Static model parameters theta. Dimension is fixed per model.
using ParamVector = Eigen::VectorXd;

using Rng = std::mt19937_64;

constexpr double kLog2Pi = 1.8378770664093453;

/// Stateless 64-bit mixer (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent generator from (root_seed, stream_id) so that
/// simulation n always sees the same randomness whether runs are serial
/// or parallel.
inline Rng make_stream(std::uint64_t root_seed, std::uint64_t stream_id) {
  const std::uint64_t a = mix64(root_seed ^ 0x243f6a8885a308d3ULL);
  const std::uint64_t b = mix64(a ^ mix64(stream_id));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

inline double log_sum_exp(const Eigen::Ref<const Vector>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a nan propagates)
  return m + std::log((v.array() - m).exp().sum());
}

/// log N(x; mean, var) for scalars. var must be > 0.
inline double gauss_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

/// Gaussian draw that tolerates sd == 0 (returns the mean exactly).
inline double gauss_sample(double mean, double sd, Rng& rng) {
  if (sd <= 0.0) return mean;
  std::normal_distribution<double> n(0.0, 1.0);
  return mean + sd * n(rng);
}

struct SimulationFailure : std::runtime_error {
  int time_index;
  SimulationFailure(int t, const std::string& what)
      : std::runtime_error(what), time_index(t) {}
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string k, const std::string& what)
      : std::runtime_error(what), key(std::move(k)) {}
};

/// Draw from N(mean, cov). Falls back to an eigendecomposition with clamped
/// eigenvalues when cov is only positive semi-definite.
Vector mvn_sample(const Vector& mean, const Matrix& cov, Rng& rng);

/// log N(x; mean, cov). Throws NumericalError if cov is not positive definite.
double mvn_logpdf(const Vector& x, const Vector& mean, const Matrix& cov);

}  // namespace tsnl

#endif  // TSNL_COMMON_HPP
