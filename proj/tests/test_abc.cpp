#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "tsnl/abc.hpp"
#include "tsnl/common.hpp"
#include "tsnl/models/lgssm.hpp"
#include "tsnl/ssm.hpp"

using namespace tsnl;

namespace {

Vector vec1(double v) {
  Vector x(1);
  x << v;
  return x;
}

// Deterministic identity simulator: the only observation is theta itself, so
// distance-to-data is |theta - y_obs| and the ABC posterior is transparent.
class IdentityModel : public SsmModel {
 public:
  int state_dim() const override { return 1; }
  int obs_dim() const override { return 1; }
  Vector sample_initial(const ParamVector& theta, Rng&) const override {
    return theta;
  }
  Vector sample_transition(const ParamVector&, const Vector& x, Rng&,
                           CostLedger& ledger) const override {
    ledger.add();
    return x;
  }
  Vector sample_observation(const ParamVector&, const Vector& x,
                            Rng&) const override {
    return x;
  }
  double observation_loglik(const ParamVector&, const Vector&,
                            const Vector&) const override {
    return 0.0;
  }
};

Prior std_normal_prior() {
  Prior p;
  p.log_density = [](const ParamVector& t) {
    return gauss_logpdf(t(0), 0.0, 1.0);
  };
  p.sample = [](Rng& rng) { return vec1(gauss_sample(0.0, 1.0, rng)); };
  p.support = [](const ParamVector&) { return true; };
  return p;
}

double fixed_point_residual(const RatioEstimate& ra,
                            const std::vector<ParamVector>& prev,
                            const std::vector<ParamVector>& curr) {
  const int Np = static_cast<int>(prev.size());
  const int Nc = static_cast<int>(curr.size());
  auto k = [&](const ParamVector& a, const ParamVector& b) {
    return std::exp(-(a - b).squaredNorm() / (2.0 * ra.sigma * ra.sigma));
  };
  Matrix E0(Np, Np), E(Nc, Np);
  for (int n = 0; n < Np; ++n)
    for (int m = 0; m < Np; ++m) E0(n, m) = k(prev[n], prev[m]);
  for (int n = 0; n < Nc; ++n)
    for (int m = 0; m < Np; ++m) E(n, m) = k(curr[n], prev[m]);
  const Vector e0 = E0.rowwise().sum();
  const Vector beta = (E * ra.alpha).cwiseInverse();
  const Vector f = ra.alpha.cwiseProduct(
      (E.transpose() * beta).cwiseQuotient(static_cast<double>(Nc) * e0));
  return (ra.alpha - f).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("ratio alpha for a single repeated particle is one") {
  std::vector<ParamVector> pts = {vec1(0.7)};
  auto ra = estimate_ratio_alpha(pts, pts, 1.0);
  REQUIRE(ra.alpha.size() == 1);
  CHECK(ra.alpha(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ra.value(pts[0]) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ratio alpha with two coincident particles satisfies the constraint") {
  std::vector<ParamVector> pts = {vec1(1.3), vec1(1.3)};
  auto ra = estimate_ratio_alpha(pts, pts, 0.5);
  REQUIRE(ra.alpha.size() == 2);
  // e0 = (2, 2), so alpha^T e0 = 1 forces alpha_1 + alpha_2 = 1/2,
  // and the kernel sum at the shared point equals that same 1/2
  CHECK(ra.alpha.sum() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(ra.value(pts[0]) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("ratio alpha converges on generic populations") {
  Rng rng = make_stream(31, 0);
  std::vector<ParamVector> prev, curr;
  for (int i = 0; i < 5; ++i) prev.push_back(vec1(gauss_sample(0.0, 1.0, rng)));
  for (int i = 0; i < 5; ++i)
    curr.push_back(vec1(gauss_sample(0.0, 0.6, rng)));
  auto ra = estimate_ratio_alpha(prev, curr, 1.0, 500000, 1e-10);

  CHECK(fixed_point_residual(ra, prev, curr) < 1e-8);
  // constraint residual: alpha^T e0 == 1 with e0 the E0 row sums
  double dot = 0.0;
  for (int n = 0; n < 5; ++n) {
    double e0n = 0.0;
    for (int m = 0; m < 5; ++m) {
      e0n += std::exp(-(prev[n] - prev[m]).squaredNorm() / 2.0);
    }
    dot += ra.alpha(n) * e0n;
  }
  CHECK(std::abs(dot - 1.0) < 1e-8);
  for (int n = 0; n < 5; ++n) CHECK(ra.alpha(n) > 0.0);
}

TEST_CASE("ratio alpha reports residuals when it cannot converge") {
  Rng rng = make_stream(32, 0);
  std::vector<ParamVector> prev, curr;
  for (int i = 0; i < 6; ++i) prev.push_back(vec1(gauss_sample(0.0, 2.0, rng)));
  for (int i = 0; i < 4; ++i) curr.push_back(vec1(gauss_sample(0.5, 0.3, rng)));
  try {
    estimate_ratio_alpha(prev, curr, 0.8, 1, 1e-14);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("ratio alpha rejects empty populations and bad sigma") {
  std::vector<ParamVector> pts = {vec1(0.0)};
  CHECK_THROWS_AS(estimate_ratio_alpha({}, pts, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_ratio_alpha(pts, {}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_ratio_alpha(pts, pts, 0.0), std::invalid_argument);
}

TEST_CASE("ratio supremum finds the taller of two separated kernels") {
  RatioEstimate ra;
  ra.alpha = Vector(2);
  ra.alpha << 0.7, 0.3;
  ra.sigma = 1.0;
  ra.anchors = {vec1(0.0), vec1(100.0)};
  const double sup = ratio_supremum(ra, ra.anchors);
  CHECK(sup == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(sup >= ra.value(ra.anchors[0]));
  CHECK(sup >= ra.value(ra.anchors[1]));
}

TEST_CASE("ratio supremum dominates a dense grid scan") {
  Rng rng = make_stream(33, 0);
  std::vector<ParamVector> prev, curr;
  for (int i = 0; i < 10; ++i)
    prev.push_back(vec1(gauss_sample(0.0, 1.0, rng)));
  for (int i = 0; i < 10; ++i)
    curr.push_back(vec1(gauss_sample(0.0, 0.5, rng)));
  auto ra = estimate_ratio_alpha(prev, curr, 1.0);
  const double sup = ratio_supremum(ra, prev);
  for (double x = -5.0; x <= 5.0; x += 0.01) {
    CHECK(sup + 1e-9 >= ra.value(vec1(x)));
  }
}

TEST_CASE("smc_abc needs at least two particles") {
  IdentityModel model;
  AbcConfig cfg;
  cfg.n_particles = 1;
  Rng rng = make_stream(1, 0);
  CostLedger ledger;
  CHECK_THROWS_AS(
      smc_abc_run(model, std_normal_prior(), {vec1(0.0)}, cfg, rng, ledger),
      std::invalid_argument);
}

TEST_CASE("smc_abc first population is the prior and the budget cap stops it") {
  IdentityModel model;
  AbcConfig cfg;
  cfg.n_particles = 512;
  cfg.max_dynamics_calls = 1;  // spent by the prior-predictive stage already
  Rng rng = make_stream(77, 0);
  CostLedger ledger;
  auto res = smc_abc_run(model, std_normal_prior(), {vec1(0.0)}, cfg, rng, ledger);

  CHECK(res.stop_reason == "budget");
  REQUIRE(res.trace.size() == 1);
  CHECK(res.trace[0].iteration == 0);
  CHECK(res.trace[0].ess == doctest::Approx(512.0));
  REQUIRE(static_cast<int>(res.particles.size()) == 512);
  CHECK(ledger.dynamics_calls() == 512);

  // with epsilon at its prior-predictive maximum the particles are prior draws
  double m = 0.0, m2 = 0.0, dmax = 0.0;
  for (const auto& p : res.particles) {
    m += p(0);
    m2 += p(0) * p(0);
    dmax = std::max(dmax, std::abs(p(0)));
  }
  m /= res.particles.size();
  m2 /= res.particles.size();
  CHECK(std::abs(m) < 0.15);
  CHECK(std::abs(m2 - m * m - 1.0) < 0.3);
  CHECK(res.trace[0].epsilon == doctest::Approx(dmax));
  CHECK(res.weights.sum() == doctest::Approx(1.0));
}

TEST_CASE("smc_abc shrinks the tolerance and concentrates on the data") {
  IdentityModel model;
  AbcConfig cfg;
  cfg.n_particles = 128;
  cfg.max_populations = 15;
  Rng rng = make_stream(91, 0);
  CostLedger ledger;
  auto res = smc_abc_run(model, std_normal_prior(), {vec1(0.0)}, cfg, rng, ledger);

  REQUIRE(res.trace.size() >= 2);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(res.trace[i].epsilon < res.trace[i - 1].epsilon);
    CHECK(res.trace[i].accept_rate > 0.0);
    CHECK(res.trace[i].accept_rate <= 1.0);
  }
  CHECK((res.stop_reason == "converged" || res.stop_reason == "max_populations" ||
         res.stop_reason == "acceptance_floor"));

  // resampling fires exactly when ESS drops below half the population
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    if (!std::isfinite(res.trace[i].ess)) continue;  // floor row
    CHECK(res.trace[i].resampled == (res.trace[i].ess < 0.5 * 128 ? 1 : 0));
  }

  // the particle cloud tightened around y_obs = 0
  double m2 = 0.0;
  for (const auto& p : res.particles) m2 += p(0) * p(0);
  m2 /= res.particles.size();
  CHECK(std::sqrt(m2) < 0.5);

  // every particle was accepted at its population's tolerance
  std::size_t last = res.trace.size() - 1;
  if (res.stop_reason == "acceptance_floor") --last;
  for (const auto& p : res.particles)
    CHECK(std::abs(p(0)) <= res.trace[last].epsilon + 1e-12);

  // weights normalized
  CHECK(res.weights.sum() == doctest::Approx(1.0));
  CHECK(ledger.dynamics_calls() > 128);
}

TEST_CASE("smc_abc converges immediately with a huge stop_delta") {
  IdentityModel model;
  AbcConfig cfg;
  cfg.n_particles = 128;
  cfg.stop_delta = 1e9;
  Rng rng = make_stream(17, 0);
  CostLedger ledger;
  auto res = smc_abc_run(model, std_normal_prior(), {vec1(0.0)}, cfg, rng, ledger);
  CHECK(res.stop_reason == "converged");
  CHECK(res.trace.size() == 1);  // no move population ran
  CHECK(ledger.dynamics_calls() == 128);
}

TEST_CASE("smc_abc hits the acceptance floor when the tolerance collapses") {
  IdentityModel model;
  AbcConfig cfg;
  cfg.n_particles = 256;
  cfg.quantile_levels = {0.002};  // aim straight at the minimum distance
  cfg.min_accept_rate = 0.5;
  cfg.max_populations = 10;
  Rng rng = make_stream(23, 0);
  CostLedger ledger;
  auto res = smc_abc_run(model, std_normal_prior(), {vec1(0.0)}, cfg, rng, ledger);
  CHECK(res.stop_reason == "acceptance_floor");
  REQUIRE(res.trace.size() >= 2);
  const auto& floor_row = res.trace.back();
  CHECK(!std::isfinite(floor_row.ess));
  CHECK(floor_row.accept_rate < 1.0);
}

TEST_CASE("smc_abc tightens the LGSSM dynamics-variance posterior") {
  auto base = LgssmSpec::scalar(0.9, 1.0, 0.0, 0.0, 0.1, 0.1, 0.0, 0.5);
  LgssmModel model(base, [](LgssmSpec s, const ParamVector& t) {
    s.Q(0, 0) = t(0);
    return s;
  });
  Prior prior;
  prior.log_density = [](const ParamVector& t) {
    if (t(0) <= 0.0) return -std::numeric_limits<double>::infinity();
    const double z = std::log(t(0));
    return gauss_logpdf(z, -2.0, 1.0) - z;
  };
  prior.sample = [](Rng& rng) {
    return vec1(std::exp(gauss_sample(-2.0, 1.0, rng)));
  };
  prior.support = [](const ParamVector& t) { return t(0) > 0.0; };

  Rng data_rng = make_stream(3, 0);
  CostLedger data_ledger;
  auto traj = simulate_trajectory(model, vec1(0.1), 25, data_rng, data_ledger);

  AbcConfig cfg;
  cfg.n_particles = 64;
  cfg.max_populations = 4;
  Rng rng = make_stream(4, 0);
  CostLedger ledger;
  auto res = smc_abc_run(model, prior, traj.observations, cfg, rng, ledger);

  REQUIRE(res.trace.size() >= 2);
  CHECK(res.trace.back().epsilon < res.trace.front().epsilon);
  for (const auto& p : res.particles) CHECK(p(0) > 0.0);

  Rng rrng = make_stream(5, 0);
  auto draws = res.resample_equal(200, rrng);
  CHECK(draws.size() == 200);
}

TEST_CASE("resample_equal follows the weights") {
  AbcResult res;
  res.particles = {vec1(1.0), vec1(2.0)};
  res.weights = Vector(2);
  res.weights << 1.0, 0.0;
  Rng rng = make_stream(6, 0);
  auto draws = res.resample_equal(50, rng);
  REQUIRE(draws.size() == 50);
  for (const auto& d : draws) CHECK(d(0) == 1.0);
}

TEST_CASE("abc trace csv has one row per population") {
  std::vector<AbcTraceRow> trace = {{0, 3.5, 1.0, 64.0, std::nan(""), 0},
                                    {1, 2.0, 0.5, 40.0, 1.7, 1}};
  std::ostringstream os;
  write_abc_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "iteration,epsilon,accept_rate,ess,c_hat,resampled");
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
}
