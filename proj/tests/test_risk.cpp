#include <cmath>
#include <memory>

#include "doctest.h"
#include "oracles.hpp"
#include "qffgp/bounds.hpp"
#include "qffgp/errors.hpp"
#include "qffgp/optimize.hpp"
#include "qffgp/risk.hpp"
#include "qffgp/rng.hpp"

using namespace qffgp;
namespace oracle = qffgp::testing;

namespace {

// One-dimensional linear dynamics x' = theta * x, the hand-checkable system.
OdeSystem linear_system() {
  OdeSystem s;
  s.name = "linear";
  s.state_dim = 1;
  s.param_dim = 1;
  s.true_theta = Eigen::VectorXd::Constant(1, 0.5);
  s.x0 = Eigen::VectorXd::Constant(1, 1.0);
  s.t_end = 1.0;
  s.rhs = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::VectorXd& dx) {
    dx[0] = th[0] * x[0];
  };
  s.jac_state = [](const Eigen::VectorXd&, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    J(0, 0) = th[0];
  };
  s.jac_params = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, Eigen::MatrixXd& J) {
    J(0, 0) = x[0];
  };
  return s;
}

OdinProblem toy_problem(const OdeSystem& sys, int n, std::uint64_t seed, bool learn_gamma,
                        double jitter_scale = 1e-6) {
  SplitMix64 rng(seed);
  OdinProblem p;
  p.system = &sys;
  p.times_unit = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  p.time_scale = 1.0;
  p.y.resize(n, sys.state_dim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < sys.state_dim; ++k) p.y(i, k) = 1.0 + rng.next_normal();
  }
  p.hyper.assign(sys.state_dim, RbfHyperparams{1.2, 0.25});
  p.sigma2 = Eigen::VectorXd::Constant(sys.state_dim, 0.1);
  p.gamma = Eigen::VectorXd::Constant(sys.state_dim, 0.2);
  p.jitter = Eigen::VectorXd::Constant(sys.state_dim, jitter_scale * 1.2);
  p.learn_gamma = learn_gamma;
  return p;
}

}  // namespace

TEST_CASE("zero data, zero states: all quadratic terms vanish") {
  const OdeSystem& lv = lookup_system("lv");
  OdinProblem p = toy_problem(lv, 12, 1, false);
  p.y.setZero();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(12, 2);
  const RiskValue rv = exact_risk(p, x, Eigen::VectorXd::Ones(4));
  CHECK(rv.prior_term == 0.0);
  CHECK(rv.obs_term == 0.0);
  CHECK(rv.deriv_term == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rv.total == rv.prior_term + rv.obs_term + rv.deriv_term + rv.logdet_term);
}

TEST_CASE("matches the explicit-inverse oracle on the linear system") {
  const OdeSystem lin = linear_system();
  OdinProblem p = toy_problem(lin, 3, 2, false, 1e-4);
  SplitMix64 rng(77);
  Eigen::MatrixXd x(3, 1);
  for (int i = 0; i < 3; ++i) x(i, 0) = rng.next_normal();
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.7);

  const double ref = oracle::dense_risk_oracle(p, x, theta);
  const RiskValue rv = exact_risk(p, x, theta);
  CHECK(rv.total == doctest::Approx(ref).epsilon(1e-10));

  p.learn_gamma = true;
  const double ref_ld = oracle::dense_risk_oracle(p, x, theta);
  const RiskValue rv_ld = exact_risk(p, x, theta);
  CHECK(rv_ld.total == doctest::Approx(ref_ld).epsilon(1e-10));
}

TEST_CASE("logdet flag adds exactly the log-determinant summand") {
  const OdeSystem& lv = lookup_system("lv");
  OdinProblem p = toy_problem(lv, 20, 3, false);
  SplitMix64 rng(8);
  Eigen::MatrixXd x(20, 2);
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 2; ++k) x(i, k) = 1.0 + 0.3 * rng.next_normal();
  const Eigen::VectorXd theta = lv.true_theta;

  const RiskValue off = exact_risk(p, x, theta);
  p.learn_gamma = true;
  const RiskValue on = exact_risk(p, x, theta);
  CHECK(on.prior_term == doctest::Approx(off.prior_term));
  CHECK(on.deriv_term == doctest::Approx(off.deriv_term));
  CHECK(on.total == doctest::Approx(off.total + on.logdet_term).epsilon(1e-12));
  CHECK(off.logdet_term == 0.0);

  // Same decomposition property for the feature path.
  const auto maps = problem_feature_maps(p, 48);
  p.learn_gamma = false;
  const RiskValue f_off = feature_risk(p, maps, x, theta);
  p.learn_gamma = true;
  const RiskValue f_on = feature_risk(p, maps, x, theta);
  CHECK(f_on.total == doctest::Approx(f_off.total + f_on.logdet_term).epsilon(1e-12));
}

TEST_CASE("feature risk at high order reproduces the dense risk") {
  // Random instances with moderate jitter: the check exercises algebraic
  // equivalence of the two solve routes, not ill-conditioned round-off.
  const OdeSystem& lv = lookup_system("lv");
  SplitMix64 rng(2024);
  for (int rep = 0; rep < 3; ++rep) {
    const double jitter_scale = 1e-4 * std::pow(10.0, rep % 2);
    OdinProblem p = toy_problem(lv, 40, 50 + rep, rep == 1, jitter_scale);
    p.hyper.assign(2, RbfHyperparams{1.0 + rng.next_uniform(), 0.2});
    Eigen::MatrixXd x(40, 2);
    for (int i = 0; i < 40; ++i)
      for (int k = 0; k < 2; ++k) x(i, k) = 1.0 + rng.next_normal();
    Eigen::VectorXd theta = lv.true_theta;
    for (int j = 0; j < 4; ++j) theta[j] *= 0.7 + 0.6 * rng.next_uniform();

    const RiskValue dense = exact_risk(p, x, theta);
    const RiskValue lowrank = feature_risk(p, problem_feature_maps(p, 256), x, theta);
    CHECK(std::abs(lowrank.total - dense.total) <= 1e-8 * std::abs(dense.total));
    CHECK(std::abs(lowrank.prior_term - dense.prior_term) <=
          1e-7 * std::max(1.0, dense.prior_term));
    CHECK(std::abs(lowrank.deriv_term - dense.deriv_term) <=
          1e-7 * std::max(1.0, dense.deriv_term));
  }
}

TEST_CASE("zero states reduce the residual to the model derivative") {
  const OdeSystem lin = linear_system();
  OdinProblem p = toy_problem(lin, 15, 9, false);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(15, 1);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.4);
  // f(0) = 0 for the linear system, so the derivative term vanishes: z = f - D*0 = 0.
  const RiskValue rv = exact_risk(p, x, theta);
  CHECK(rv.deriv_term == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("theorem-4 order delivers the relative error for random configurations") {
  const OdeSystem& lv = lookup_system("lv");
  const int n = 60;
  const double eps = 0.5;
  OdinProblem p = toy_problem(lv, n, 13, false, 1e-5);

  double l_min = 1e9, worst_m = 0;
  for (const auto& h : p.hyper) l_min = std::min(l_min, h.lengthscale);
  int m = 0;
  for (int k = 0; k < 2; ++k) {
    m = std::max(m, min_order_risk(p.hyper[k].lengthscale, p.hyper[k].variance, p.jitter[k],
                                   p.gamma[k], n, eps));
  }
  (void)worst_m;
  (void)l_min;

  auto shared = std::make_shared<const OdinProblem>(p);
  ExactRiskEvaluator dense(shared);
  FeatureRiskEvaluator lowrank(shared, problem_feature_maps(p, m));

  SplitMix64 rng(31337);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) x(i, k) = 2.0 * rng.next_normal();
    Eigen::VectorXd theta(4);
    for (int j = 0; j < 4; ++j) theta[j] = 4.0 * rng.next_uniform();
    const double R = dense.value(x, theta).total;
    const double Rt = lowrank.value(x, theta).total;
    CHECK(std::abs(R - Rt) / R <= eps);
  }
}

TEST_CASE("analytic gradients match finite differences") {
  const OdeSystem& lv = lookup_system("lv");
  for (bool learn : {false, true}) {
    CAPTURE(learn);
    OdinProblem p = toy_problem(lv, 20, 4, learn, 1e-4);
    auto shared = std::make_shared<const OdinProblem>(p);

    ExactRiskEvaluator dense(shared);
    FeatureRiskEvaluator lowrank(shared, problem_feature_maps(p, 40));
    std::vector<RiskEvaluator*> evals{&dense, &lowrank};

    SplitMix64 rng(500 + (learn ? 1 : 0));
    Eigen::MatrixXd x(20, 2);
    for (int i = 0; i < 20; ++i)
      for (int k = 0; k < 2; ++k) x(i, k) = 1.0 + 0.5 * rng.next_normal();
    Eigen::VectorXd theta = lv.true_theta;
    Eigen::VectorXd gamma = p.gamma;

    for (RiskEvaluator* ev : evals) {
      RiskGradient grad;
      ev->value_and_grad(x, theta, gamma, grad);
      const double h = 1e-6;

      for (const auto& [i, k] : {std::pair{3, 0}, std::pair{11, 1}, std::pair{19, 0}}) {
        Eigen::MatrixXd xp = x, xm = x;
        xp(i, k) += h;
        xm(i, k) -= h;
        const double fd =
            (ev->value(xp, theta, gamma).total - ev->value(xm, theta, gamma).total) / (2 * h);
        CHECK(grad.x(i, k) == doctest::Approx(fd).epsilon(1e-4));
      }
      for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        const double fd =
            (ev->value(x, tp, gamma).total - ev->value(x, tm, gamma).total) / (2 * h);
        CHECK(grad.theta[j] == doctest::Approx(fd).epsilon(1e-4));
      }
      if (learn) {
        for (int k = 0; k < 2; ++k) {
          Eigen::VectorXd gp = gamma, gm = gamma;
          gp[k] += h * gamma[k];
          gm[k] -= h * gamma[k];
          const double fd = (ev->value(x, theta, gp).total - ev->value(x, theta, gm).total) /
                            (gp[k] - gm[k]);
          CHECK(grad.gamma[k] == doctest::Approx(fd).epsilon(1e-4));
        }
      }
    }
  }
}

TEST_CASE("risk input validation") {
  const OdeSystem& lv = lookup_system("lv");
  OdinProblem p = toy_problem(lv, 8, 6, false);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(8, 2);
  CHECK_THROWS_AS(exact_risk(p, x, Eigen::VectorXd::Ones(3)), DomainError);
  x(3, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(exact_risk(p, x, lv.true_theta), NumericError);
}
