#include <cmath>
#include <limits>
#include <random>

#include "tsnl/experiment.hpp"
#include "tsnl/models/lgssm.hpp"
#include "tsnl/models/lv.hpp"
#include "tsnl/models/sv.hpp"

namespace tsnl {

namespace {

// lgssm1d: infer the dynamics variance Q of a scalar LGSSM with
// A=0.9, H=1, R=0.1. Prior log-normal(-2, 1), so z = log Q is exactly
// N(-2, 1) and elliptical slice sampling applies.
ModelSetup lgssm1d_setup() {
  ModelSetup s;
  s.name = "lgssm1d";
  LgssmSpec base = LgssmSpec::scalar(0.9, 1.0, 0.0, 0.0, 0.1, 0.1, 0.0, 0.5);
  s.model = std::make_shared<LgssmModel>(
      base, [](LgssmSpec spec, const ParamVector& theta) {
        spec.Q(0, 0) = theta[0];
        return spec;
      });
  s.prior.log_density = [](const ParamVector& theta) {
    if (theta[0] <= 0.0) return -std::numeric_limits<double>::infinity();
    const double z = std::log(theta[0]);
    return gauss_logpdf(z, -2.0, 1.0) - z;
  };
  s.prior.sample = [](Rng& rng) {
    ParamVector th(1);
    th[0] = std::exp(gauss_sample(-2.0, 1.0, rng));
    return th;
  };
  s.prior.support = [](const ParamVector& theta) { return theta[0] > 0.0; };
  s.transform = ParamTransform::uniform(1, Transform::Log);
  GaussianPrior zp;
  zp.mean = Vector::Constant(1, -2.0);
  zp.cov = Matrix::Identity(1, 1);
  s.z_prior = zp;
  s.theta_gt = ParamVector::Constant(1, 0.1);
  s.param_names = {"Q"};
  return s;
}

// sv2d: infer the off-diagonal entry of the 2x2 asset correlation matrix C.
// Prior uniform on (-1, 1); tanh transform keeps C positive definite.
ModelSetup sv2d_setup() {
  ModelSetup s;
  s.name = "sv2d";
  s.model = std::make_shared<SvModel>(
      sv2d_default_spec(), [](SvSpec spec, const ParamVector& theta) {
        spec.C(0, 1) = theta[0];
        spec.C(1, 0) = theta[0];
        return spec;
      });
  s.prior.log_density = [](const ParamVector& theta) {
    return std::abs(theta[0]) < 1.0 ? -std::log(2.0)
                                    : -std::numeric_limits<double>::infinity();
  };
  s.prior.sample = [](Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ParamVector th(1);
    th[0] = u(rng);
    return th;
  };
  s.prior.support = [](const ParamVector& theta) {
    return std::abs(theta[0]) < 1.0;
  };
  s.transform = ParamTransform::uniform(1, Transform::Tanh);
  s.theta_gt = ParamVector::Constant(1, 0.52);
  s.param_names = {"C12"};
  return s;
}

// lv: infer the four reaction rates. Prior log-uniform over [1e-4, 1] per
// rate (configuration; the rates themselves are not pinned anywhere).
ModelSetup lv_setup() {
  ModelSetup s;
  s.name = "lv";
  s.model = std::make_shared<LvModel>(
      LvSpec{}, [](LvSpec spec, const ParamVector& theta) {
        for (int r = 0; r < 4; ++r) spec.rates[r] = theta[r];
        return spec;
      });
  const double lo = std::log(1e-4), hi = 0.0;
  s.prior.log_density = [lo, hi](const ParamVector& theta) {
    double ld = 0.0;
    for (int i = 0; i < theta.size(); ++i) {
      const double z = std::log(theta[i]);
      if (!(theta[i] > 0.0) || z < lo || z > hi) {
        return -std::numeric_limits<double>::infinity();
      }
      ld += -std::log(hi - lo) - z;
    }
    return ld;
  };
  s.prior.sample = [lo, hi](Rng& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    ParamVector th(4);
    for (int i = 0; i < 4; ++i) th[i] = std::exp(u(rng));
    return th;
  };
  s.prior.support = [lo, hi](const ParamVector& theta) {
    for (int i = 0; i < theta.size(); ++i) {
      if (!(theta[i] > 0.0)) return false;
      const double z = std::log(theta[i]);
      if (z < lo || z > hi) return false;
    }
    return true;
  };
  s.transform = ParamTransform::uniform(4, Transform::Log);
  LvSpec def;
  s.theta_gt = ParamVector(4);
  for (int r = 0; r < 4; ++r) s.theta_gt[r] = def.rates[r];
  s.param_names = {"rho1", "rho2", "rho3", "rho4"};
  return s;
}

}  // namespace

ModelSetup make_model_setup(const std::string& name) {
  if (name == "lgssm1d") return lgssm1d_setup();
  if (name == "sv2d") return sv2d_setup();
  if (name == "lv") return lv_setup();
  throw ConfigError("model", "config: model: unknown model '" + name +
                                 "' (expected lgssm1d|sv2d|lv)");
}

}  // namespace tsnl
