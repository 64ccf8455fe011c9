// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "harness.hpp"
#include "oracles.hpp"
#include "qffgp/bounds.hpp"
#include "qffgp/dataset.hpp"
#include "qffgp/gp_deriv.hpp"
#include "qffgp/hyperfit.hpp"
#include "qffgp/optimize.hpp"
#include "qffgp/risk.hpp"
#include "qffgp/rng.hpp"

using namespace qffgp;
using qffgp::cli::median;
using qffgp::cli::loglog_slope;
using qffgp::cli::parallel_for;
using qffgp::cli::prepare_experiment;
using qffgp::cli::build_deriv_observations;
using qffgp::cli::time_per_iteration;
using qffgp::cli::HyperMode;
namespace oracle = qffgp::testing;

namespace {

constexpr double kSqrtPi = 1.7724538509055160272981674833411;
int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] %s: %s (%.1fs)\n", pass ? "PASS" : "FAIL", name, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// --------------------------------------------------------------------------
// Criterion 1: quadrature exactness on random degree-(2m-1) polynomials.
// --------------------------------------------------------------------------
void criterion1() {
  Timer timer;
  SplitMix64 rng(11);
  int violations = 0;
  double worst = 0.0;
  for (int m : {2, 4, 8, 16, 32, 64}) {
    const QuadratureRule rule = gauss_hermite_rule(m);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> coeffs(2 * m);
      for (auto& c : coeffs) c = 2.0 * rng.next_uniform() - 1.0;
      const double exact = oracle::poly_gaussian_integral(coeffs);
      const double quad =
          quadrature_apply(rule, [&](double w) { return oracle::poly_eval(coeffs, w); });
      const double rel = std::abs(quad - exact) / (1.0 + std::abs(exact));
      worst = std::max(worst, rel);
      if (rel > 1e-10) ++violations;
    }
  }
  report("criterion-1 quadrature-exactness", violations == 0 && timer.seconds() < 5.0,
         "m in {2..64}, 20 random polynomials each, worst relative error " + fmt(worst) +
             " (tolerance 1e-10)",
         timer.seconds());
}

// --------------------------------------------------------------------------
// Criterion 2: deterministic kernel/derivative bounds over the sweep ladder,
// plus the exponential-decay and numeric-plateau shape checks at l = 0.1/0.5.
// --------------------------------------------------------------------------
struct SweepErrs {
  double k, d1, d2;
};

SweepErrs max_errors(const QffFeatureMap& map, int grid) {
  const RbfHyperparams& h = map.hyperparams();
  const Eigen::VectorXd p0 = map.phi(0.0);
  const Eigen::VectorXd p0p = map.phi_prime(0.0);
  SweepErrs e{0, 0, 0};
  for (int i = 0; i < grid; ++i) {
    const double r = static_cast<double>(i) / (grid - 1);
    const Eigen::VectorXd pr = map.phi(r);
    const Eigen::VectorXd prp = map.phi_prime(r);
    e.k = std::max(e.k, std::abs(kernel_eval(h, r) - pr.dot(p0)));
    e.d1 = std::max(e.d1, std::abs(kernel_d1(h, r) - prp.dot(p0)));
    e.d2 = std::max(e.d2, std::abs(kernel_d2(h, r) - prp.dot(p0p)));
  }
  return e;
}

void criterion2() {
  Timer timer;
  int violations = 0;
  std::vector<double> l01_errs;
  double plateau_lo = 1e100, plateau_hi = 0.0;
  const double floor_scale = 1e-13 * kSqrtPi;  // double-precision plateau
  for (double l : {0.05, 0.1, 0.5}) {
    for (int m = 8; m <= 128; m += 8) {
      const SweepErrs e = max_errors(QffFeatureMap({kSqrtPi, l}, m), 1001);
      const ErrorBudget b = theorem2_budget(m, l);
      if (e.k > std::max(b.em, floor_scale)) ++violations;
      if (e.d1 > std::max(b.d1_bound, floor_scale / l)) ++violations;
      if (e.d2 > std::max(b.d2_bound, floor_scale / (l * l))) ++violations;
      if (l == 0.1) l01_errs.push_back(e.k);
      if (l == 0.5 && m >= 64) {
        plateau_lo = std::min(plateau_lo, e.k);
        plateau_hi = std::max(plateau_hi, e.k);
      }
    }
  }
  // Pre-floor decay at l = 0.1: every consecutive +8 step inside
  // (1e-13, 1e-2) must lose at least one decade, and at least one such step
  // must exist.
  int qualifying = 0, decay_violations = 0;
  for (std::size_t i = 0; i + 1 < l01_errs.size(); ++i) {
    if (l01_errs[i] <= 1e-2 && l01_errs[i + 1] >= 1e-13) {
      ++qualifying;
      if (l01_errs[i + 1] > l01_errs[i] / 10.0) ++decay_violations;
    }
  }
  const bool plateau_ok = plateau_hi <= 1e-12 && plateau_lo >= 1e-17;
  const bool pass = violations == 0 && qualifying >= 1 && decay_violations == 0 && plateau_ok &&
                    timer.seconds() < 30.0;
  report("criterion-2 theorem2-soundness", pass,
         std::to_string(violations) + " bound violations over l in {0.05,0.1,0.5} x m in {8..128}"
         "; decade-per-+8 steps at l=0.1: " +
             std::to_string(qualifying) + " checked, " + std::to_string(decay_violations) +
             " failed; plateau at l=0.5 in [" + fmt(plateau_lo) + ", " + fmt(plateau_hi) + "]",
         timer.seconds());
}

// --------------------------------------------------------------------------
// Criterion 3: posterior bound (synthetic N=200) and the Lorenz decay shape.
// --------------------------------------------------------------------------
void criterion3() {
  Timer timer;
  const double tol = 1e-2;
  int violations = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RbfHyperparams truth{1.0, 0.15};
    const int n = 200;
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
    const auto draw = oracle::sample_gp_with_derivatives(truth, times, 3000 + seed);
    const double sigma2 = 0.01, gamma = 0.01;
    SplitMix64 rng(4000 + seed);
    DerivObservationSet obs;
    obs.times = times;
    obs.y = draw.x;
    obs.F = draw.xdot;
    for (int i = 0; i < n; ++i) {
      obs.y[i] += std::sqrt(sigma2) * rng.next_normal();
      obs.F[i] += std::sqrt(gamma) * rng.next_normal();
    }
    obs.gamma = gamma;

    FitOptions fo;
    fo.l_min = 0.05;
    fo.l_max = 0.5;
    const FittedHyper fit = fit_hyperparams(obs.y, times, fo);
    obs.sigma2 = fit.sigma2;

    const double R = std::max(obs.y.cwiseAbs().maxCoeff(), obs.F.cwiseAbs().maxCoeff());
    const double c = std::min(gamma, fit.sigma2);
    const int m = min_order_gprd(fit.hyper.lengthscale, fit.hyper.variance, n, c, R, tol);

    const ExactGpDeriv exact(obs, fit.hyper);
    const FeatureGpDeriv approx(obs, QffFeatureMap(fit.hyper, m));
    for (int i = 0; i <= 100; ++i) {
      const double tau = i / 100.0;
      const PosteriorQuery a = exact.query(tau);
      const PosteriorQuery b = approx.query(tau);
      const double e = std::max({std::abs(a.mu - b.mu), std::abs(a.sigma - b.sigma),
                                 std::abs(a.mu_prime - b.mu_prime),
                                 std::abs(a.sigma_prime - b.sigma_prime)});
      worst = std::max(worst, e);
      if (e > tol) ++violations;
    }
  }

  // Lorenz N=1000, SNR=100, first state dimension at tau = 0.8: the QFF
  // posterior error must fall by >= 6 decades between m = 16 and m = 96.
  const OdeSystem& lorenz = lookup_system("lorenz");
  const auto prep = prepare_experiment(lorenz, 1000, NoiseSpec::snr(100.0), 0, HyperMode{}, {});
  const auto dd = build_deriv_observations(lorenz, prep, 0);
  const ExactGpDeriv exact(dd.per_dim[0], prep.hyper[0]);
  const PosteriorQuery ref = exact.query(0.8);
  auto etot = [&](int m) {
    const FeatureGpDeriv fgp(dd.per_dim[0], QffFeatureMap(prep.hyper[0], m));
    const PosteriorQuery q = fgp.query(0.8);
    return std::max({std::abs(q.mu - ref.mu), std::abs(q.sigma - ref.sigma),
                     std::abs(q.mu_prime - ref.mu_prime),
                     std::abs(q.sigma_prime - ref.sigma_prime)});
  };
  const double e16 = etot(16);
  const double e96 = etot(96);
  const double decades = std::log10(e16 / e96);

  const bool pass = violations == 0 && decades >= 6.0 && timer.seconds() < 300.0;
  report("criterion-3 theorem3-posterior", pass,
         "5 seeds x 101 query points at tolerance 1e-2: " + std::to_string(violations) +
             " violations (worst e_tot " + fmt(worst) + "); Lorenz decay m=16 -> m=96: " +
             fmt(decades) + " decades (need >= 6)",
         timer.seconds());
}

// --------------------------------------------------------------------------
// Criterion 4: relative risk error under the theorem-4 minimum order.
// --------------------------------------------------------------------------
void criterion4() {
  Timer timer;
  int violations = 0;
  double worst_rel = 0.0;
  for (int n : {60, 100}) {
    const auto prep = prepare_experiment(lookup_system("lv"), n, NoiseSpec::variance(0.1), 0,
                                         HyperMode{}, {});
    OdinProblem p = make_problem(lookup_system("lv"), prep.data, prep.hyper, prep.sigma2, false);
    auto shared = std::make_shared<const OdinProblem>(p);
    ExactRiskEvaluator dense(shared);
    for (double eps : {0.5, 0.1}) {
      int m = 0;
      for (int k = 0; k < 2; ++k) {
        m = std::max(m, min_order_risk(p.hyper[k].lengthscale, p.hyper[k].variance, p.jitter[k],
                                       p.gamma[k], n, eps));
      }
      FeatureRiskEvaluator lowrank(shared, problem_feature_maps(p, m));
      SplitMix64 rng(9000 + n + static_cast<int>(eps * 10));
      for (int rep = 0; rep < 100; ++rep) {
        Eigen::MatrixXd x(n, 2);
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < 2; ++k) x(i, k) = 2.0 + 2.0 * rng.next_normal();
        Eigen::VectorXd theta(4);
        for (int j = 0; j < 4; ++j) theta[j] = 5.0 * rng.next_uniform();
        const double R = dense.value(x, theta).total;
        const double Rt = lowrank.value(x, theta).total;
        const double rel = std::abs(R - Rt) / R;
        worst_rel = std::max(worst_rel, rel / eps);
        if (rel > eps) ++violations;
      }
    }
  }
  report("criterion-4 theorem4-risk", violations == 0 && timer.seconds() < 180.0,
         "N in {60,100} x eps in {0.5,0.1} x 100 random (x,theta): " +
             std::to_string(violations) + " violations (worst rel-error/eps " + fmt(worst_rel) +
             ")",
         timer.seconds());
}

// --------------------------------------------------------------------------
// Criterion 5: oracle equivalence of the dense and low-rank routes.
// --------------------------------------------------------------------------
void criterion5() {
  Timer timer;
  // Posterior quantities at m = 256, l = 0.2, N = 100.
  const RbfHyperparams h{1.0, 0.2};
  const int n = 100;
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  const auto draw = oracle::sample_gp_with_derivatives(h, times, 17);
  SplitMix64 rng(18);
  DerivObservationSet obs;
  obs.times = times;
  obs.y = draw.x;
  obs.F = draw.xdot;
  for (int i = 0; i < n; ++i) {
    obs.y[i] += 0.2 * rng.next_normal();
    obs.F[i] += 0.2 * rng.next_normal();
  }
  obs.sigma2 = 0.04;
  obs.gamma = 0.04;
  const ExactGpDeriv exact(obs, h);
  const FeatureGpDeriv approx(obs, QffFeatureMap(h, 256));
  double worst_post = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double tau = i / 50.0;
    const PosteriorQuery a = exact.query(tau);
    const PosteriorQuery b = approx.query(tau);
    worst_post = std::max({worst_post, std::abs(a.mu - b.mu), std::abs(a.sigma - b.sigma),
                           std::abs(a.mu_prime - b.mu_prime),
                           std::abs(a.sigma_prime - b.sigma_prime)});
  }

  // Risk at m = 256 on 20 random instances (jitter in [1e-4, 1e-2] * rho so
  // the check measures route equivalence, not ill-conditioned round-off).
  const OdeSystem& lv = lookup_system("lv");
  double worst_risk = 0.0;
  SplitMix64 rng2(19);
  for (int inst = 0; inst < 20; ++inst) {
    const int nn = 40;
    OdinProblem p;
    p.system = &lv;
    p.times_unit = Eigen::VectorXd::LinSpaced(nn, 0.0, 1.0);
    p.time_scale = 2.0;
    p.y.resize(nn, 2);
    for (int i = 0; i < nn; ++i)
      for (int k = 0; k < 2; ++k) p.y(i, k) = 2.0 + rng2.next_normal();
    const double rho = 0.5 + 2.0 * rng2.next_uniform();
    p.hyper.assign(2, RbfHyperparams{rho, 0.15 + 0.2 * rng2.next_uniform()});
    p.sigma2 = Eigen::VectorXd::Constant(2, 0.05 + 0.2 * rng2.next_uniform());
    p.gamma = Eigen::VectorXd::Constant(2, 0.05 + 0.2 * rng2.next_uniform());
    p.jitter = Eigen::VectorXd::Constant(
        2, rho * std::pow(10.0, -4.0 + 2.0 * rng2.next_uniform()));
    p.learn_gamma = (inst % 2 == 0);
    Eigen::MatrixXd x(nn, 2);
    for (int i = 0; i < nn; ++i)
      for (int k = 0; k < 2; ++k) x(i, k) = 2.0 + rng2.next_normal();
    Eigen::VectorXd theta(4);
    for (int j = 0; j < 4; ++j) theta[j] = 4.0 * rng2.next_uniform();
    const double dense = exact_risk(p, x, theta).total;
    const double lowrank = feature_risk(p, problem_feature_maps(p, 256), x, theta).total;
    worst_risk = std::max(worst_risk, std::abs(dense - lowrank) / std::abs(dense));
  }

  const bool pass = worst_post <= 1e-8 && worst_risk <= 1e-8 && timer.seconds() < 60.0;
  report("criterion-5 oracle-equivalence", pass,
         "posterior gap " + fmt(worst_post) + " (<= 1e-8 absolute), risk gap " + fmt(worst_risk) +
             " (<= 1e-8 relative, 20 instances)",
         timer.seconds());
}

// --------------------------------------------------------------------------
// Criterion 6: end-to-end parameter inference, consistency and learning curve.
// --------------------------------------------------------------------------
struct OdinOutcome {
  double trmse = std::numeric_limits<double>::infinity();
};

OdinOutcome run_odin(int n, std::uint64_t seed, bool exact_path, int order) {
  const OdeSystem& lv = lookup_system("lv");
  const auto prep = prepare_experiment(lv, n, NoiseSpec::variance(0.1), seed, HyperMode{}, {});
  OdinProblem p = make_problem(lv, prep.data, prep.hyper, prep.sigma2, true);
  auto shared = std::make_shared<const OdinProblem>(p);
  std::unique_ptr<RiskEvaluator> eval;
  if (exact_path) {
    eval = std::make_unique<ExactRiskEvaluator>(shared);
  } else {
    eval = std::make_unique<FeatureRiskEvaluator>(shared, problem_feature_maps(p, order));
  }
  OptimizeOptions oo;
  oo.max_iterations = 5000;
  const OptimizeResult res = optimize(*eval, prep.data.y, Eigen::VectorXd::Ones(4), oo);
  OdinOutcome out;
  out.trmse = trajectory_rmse(lv, res.theta, prep.data);
  return out;
}

void criterion6() {
  Timer timer;
  const int seeds = 5;
  std::vector<double> exact100(seeds), qff100(seeds), qff1000(seeds);
  parallel_for(seeds, 2, [&](int s) {
    exact100[s] = run_odin(100, s, true, 40).trmse;
    qff100[s] = run_odin(100, s, false, 40).trmse;
    qff1000[s] = run_odin(1000, s, false, 40).trmse;
  });
  const double med_exact = median(exact100);
  const double med_qff = median(qff100);
  const double med_1000 = median(qff1000);
  const bool consistent = std::abs(med_qff - med_exact) <= 0.10 * med_exact;

  // Learning-curve monotonicity with the documented one-seed exemption: the
  // comparison may also pass after dropping any single seed from either set.
  bool monotone = med_1000 <= med_qff;
  if (!monotone) {
    for (int drop = 0; drop < seeds && !monotone; ++drop) {
      std::vector<double> a, b;
      for (int s = 0; s < seeds; ++s) {
        if (s != drop) a.push_back(qff100[s]);
        b.push_back(qff1000[s]);
      }
      if (median(b) <= median(a)) monotone = true;
      a.clear();
      b.clear();
      for (int s = 0; s < seeds; ++s) {
        a.push_back(qff100[s]);
        if (s != drop) b.push_back(qff1000[s]);
      }
      if (median(b) <= median(a)) monotone = true;
    }
  }

  const bool pass = consistent && monotone && timer.seconds() < 900.0;
  report("criterion-6 odin-end-to-end", pass,
         "median tRMSE: exact " + fmt(med_exact) + ", features(m=40) " + fmt(med_qff) +
             " (gap " + fmt(std::abs(med_qff - med_exact) / med_exact) +
             ", limit 0.10); N=1000 median " + fmt(med_1000) + " <= N=100 median " +
             fmt(med_qff) + (monotone ? "" : " VIOLATED"),
         timer.seconds());
}

// --------------------------------------------------------------------------
// Criterion 7: complexity properties (speedup and scaling slopes).
// --------------------------------------------------------------------------
void criterion7() {
  Timer timer;
  const OdeSystem& lv = lookup_system("lv");

  // Speedup at N = 1000, order 40 (80 features).
  const auto prep1k = prepare_experiment(lv, 1000, NoiseSpec::variance(0.1), 0, HyperMode{}, {});
  OdinProblem p1k = make_problem(lv, prep1k.data, prep1k.hyper, prep1k.sigma2, true);
  auto shared1k = std::make_shared<const OdinProblem>(p1k);
  double ms_exact, ms_feat;
  {
    ExactRiskEvaluator dense(shared1k);
    ms_exact = time_per_iteration(dense, prep1k.data.y, lv.true_theta, p1k.gamma, 15).first;
    FeatureRiskEvaluator lowrank(shared1k, problem_feature_maps(p1k, 40));
    ms_feat = time_per_iteration(lowrank, prep1k.data.y, lv.true_theta, p1k.gamma, 15).first;
  }
  const double speedup = ms_exact / ms_feat;

  // Slope vs observations at fixed order 40.
  std::vector<double> ns{1000, 2000, 4000, 8000}, t_n;
  for (double nv : ns) {
    const int n = static_cast<int>(nv);
    const auto prep = prepare_experiment(lv, n, NoiseSpec::variance(0.1), 0, HyperMode{}, {});
    OdinProblem p = make_problem(lv, prep.data, prep.hyper, prep.sigma2, true);
    auto shared = std::make_shared<const OdinProblem>(p);
    FeatureRiskEvaluator lowrank(shared, problem_feature_maps(p, 40));
    t_n.push_back(time_per_iteration(lowrank, prep.data.y, lv.true_theta, p.gamma, 15).first);
  }
  const double slope_n = loglog_slope(ns, t_n);

  // Slope vs feature count at fixed N = 1000.
  std::vector<double> ms_ladder{64, 128, 256, 512}, t_m;
  for (double mv : ms_ladder) {
    FeatureRiskEvaluator lowrank(shared1k,
                                 problem_feature_maps(p1k, static_cast<int>(mv) / 2));
    t_m.push_back(time_per_iteration(lowrank, prep1k.data.y, lv.true_theta, p1k.gamma, 15).first);
  }
  const double slope_m = loglog_slope(ms_ladder, t_m);

  const bool pass = speedup >= 10.0 && slope_n >= 0.7 && slope_n <= 1.5 && slope_m >= 2.0 &&
                    slope_m <= 3.5 && timer.seconds() < 600.0;
  report("criterion-7 complexity", pass,
         "speedup at N=1000, 80 features: " + fmt(speedup) + "x (need >= 10); slope vs N " +
             fmt(slope_n) + " (need [0.7,1.5]); slope vs features " + fmt(slope_m) +
             " (need [2.0,3.5])",
         timer.seconds());
}

// --------------------------------------------------------------------------
// Criterion 8: analytic risk gradients against central finite differences.
// --------------------------------------------------------------------------
void criterion8() {
  Timer timer;
  const OdeSystem& lv = lookup_system("lv");
  double worst = 0.0;
  SplitMix64 rng(31);
  for (int draw = 0; draw < 10; ++draw) {
    const int n = 20;
    OdinProblem p;
    p.system = &lv;
    p.times_unit = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
    p.time_scale = 2.0;
    p.y.resize(n, 2);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) p.y(i, k) = 2.0 + rng.next_normal();
    p.hyper.assign(2, RbfHyperparams{1.0 + rng.next_uniform(), 0.2 + 0.2 * rng.next_uniform()});
    p.sigma2 = Eigen::VectorXd::Constant(2, 0.1);
    p.gamma = Eigen::VectorXd::Constant(2, 0.1 + 0.1 * rng.next_uniform());
    p.jitter = Eigen::VectorXd::Constant(2, 1e-4);
    p.learn_gamma = (draw % 2 == 0);
    auto shared = std::make_shared<const OdinProblem>(p);
    FeatureRiskEvaluator eval(shared, problem_feature_maps(p, 48));

    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) x(i, k) = 2.0 + rng.next_normal();
    Eigen::VectorXd theta(4);
    for (int j = 0; j < 4; ++j) theta[j] = 0.5 + 4.0 * rng.next_uniform();

    RiskGradient grad;
    eval.value_and_grad(x, theta, p.gamma, grad);
    const double h = 1e-6;
    auto rel_gap = [](double analytic, double fd) {
      return std::abs(analytic - fd) / std::max(1e-8, std::abs(fd));
    };
    for (int probe = 0; probe < 6; ++probe) {
      const int i = static_cast<int>(rng.next_u64() % n);
      const int k = static_cast<int>(rng.next_u64() % 2);
      Eigen::MatrixXd xp = x, xm = x;
      xp(i, k) += h;
      xm(i, k) -= h;
      const double fd =
          (eval.value(xp, theta, p.gamma).total - eval.value(xm, theta, p.gamma).total) / (2 * h);
      worst = std::max(worst, rel_gap(grad.x(i, k), fd));
    }
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double fd =
          (eval.value(x, tp, p.gamma).total - eval.value(x, tm, p.gamma).total) / (2 * h);
      worst = std::max(worst, rel_gap(grad.theta[j], fd));
    }
    if (p.learn_gamma) {
      for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd gp = p.gamma, gm = p.gamma;
        gp[k] *= 1.0 + 1e-6;
        gm[k] *= 1.0 - 1e-6;
        const double fd = (eval.value(x, theta, gp).total - eval.value(x, theta, gm).total) /
                          (gp[k] - gm[k]);
        worst = std::max(worst, rel_gap(grad.gamma[k], fd));
      }
    }
  }
  report("criterion-8 gradient-checks", worst <= 1e-4,
         "10 random N=20 instances, worst relative gap " + fmt(worst) + " (tolerance 1e-4)",
         timer.seconds());
}

// --------------------------------------------------------------------------
// Reduced quadrocopter smoke run: must complete and yield a finite tRMSE.
// --------------------------------------------------------------------------
void quadrocopter_smoke() {
  Timer timer;
  const OdeSystem& quad = lookup_system("quadrocopter");
  const auto prep = prepare_experiment(quad, 1500, NoiseSpec::snr(10.0), 0, HyperMode{}, {});
  OdinProblem p = make_problem(quad, prep.data, prep.hyper, prep.sigma2, true);
  auto shared = std::make_shared<const OdinProblem>(p);
  FeatureRiskEvaluator eval(shared, problem_feature_maps(p, 50));
  // Smoke protocol: 20% multiplicative parameter perturbation as the start
  // (the reference parameters span four orders of magnitude).
  SplitMix64 rng(77);
  Eigen::VectorXd theta0 = quad.true_theta;
  for (int j = 0; j < theta0.size(); ++j) theta0[j] *= 1.0 + 0.2 * (2.0 * rng.next_uniform() - 1.0);
  OptimizeOptions oo;
  oo.max_iterations = 1000;
  const OptimizeResult res = optimize(eval, qffgp::cli::smoothed_states(prep), theta0, oo);
  double trmse = std::numeric_limits<double>::infinity();
  try {
    trmse = trajectory_rmse(quad, res.theta, prep.data);
  } catch (const IntegrationError&) {
  }
  report("quadrocopter-smoke", std::isfinite(trmse),
         "N=1500, SNR=10, 100 features, 12 dimensions: tRMSE " + fmt(trmse) +
             " after " + std::to_string(res.iterations) + " iterations",
         timer.seconds());
}

}  // namespace

int main() {
  std::printf("acceptance suite (one line per criterion)\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  quadrocopter_smoke();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
