#include "qffgp/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "qffgp/errors.hpp"

namespace qffgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Packing {
  int n = 0, K = 0, P = 0;
  bool learn_gamma = false;
  Eigen::VectorXd gamma_floor;  // gamma = floor + exp(v), keeping gamma > floor
  int size() const { return n * K + P + (learn_gamma ? K : 0); }

  void unpack(const Eigen::VectorXd& v, Eigen::MatrixXd& x, Eigen::VectorXd& theta,
              Eigen::VectorXd& gamma, const Eigen::VectorXd& gamma_fixed) const {
    x = Eigen::Map<const Eigen::MatrixXd>(v.data(), n, K);
    theta = v.segment(n * K, P);
    if (learn_gamma) {
      gamma = gamma_floor + v.tail(K).array().exp().matrix();
    } else {
      gamma = gamma_fixed;
    }
  }

  Eigen::VectorXd pack(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta,
                       const Eigen::VectorXd& gamma) const {
    Eigen::VectorXd v(size());
    Eigen::Map<Eigen::MatrixXd>(v.data(), n, K) = x;
    v.segment(n * K, P) = theta;
    if (learn_gamma) {
      for (int k = 0; k < K; ++k) {
        const double excess = std::max(gamma[k] - gamma_floor[k], 1e-3 * gamma_floor[k]);
        v[n * K + P + k] = std::log(excess);
      }
    }
    return v;
  }
};

}  // namespace

OptimizeResult optimize(RiskEvaluator& eval, const Eigen::MatrixXd& x0,
                        const Eigen::VectorXd& theta0, const OptimizeOptions& options) {
  const OdinProblem& p = eval.problem();
  Packing pk;
  pk.n = p.num_times();
  pk.K = p.num_dims();
  pk.P = p.system->param_dim;
  pk.learn_gamma = p.learn_gamma;
  pk.gamma_floor.resize(pk.K);
  for (int k = 0; k < pk.K; ++k) pk.gamma_floor[k] = p.gamma_floor_at(k);

  Eigen::MatrixXd x = x0;
  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd gamma = p.gamma;
  Eigen::VectorXd v = pk.pack(x, theta, gamma);
  const int dim = pk.size();

  auto value_at = [&](const Eigen::VectorXd& vv) -> double {
    Eigen::MatrixXd xx;
    Eigen::VectorXd tt, gg;
    pk.unpack(vv, xx, tt, gg, p.gamma);
    try {
      return eval.value(xx, tt, gg).total;
    } catch (const NumericError&) {
      return kInf;
    }
  };

  RiskGradient rg;
  auto value_grad_at = [&](const Eigen::VectorXd& vv, Eigen::VectorXd& g) -> double {
    Eigen::MatrixXd xx;
    Eigen::VectorXd tt, gg;
    pk.unpack(vv, xx, tt, gg, p.gamma);
    const RiskValue rv = eval.value_and_grad(xx, tt, gg, rg);
    g.resize(dim);
    Eigen::Map<Eigen::MatrixXd>(g.data(), pk.n, pk.K) = rg.x;
    g.segment(pk.n * pk.K, pk.P) = rg.theta;
    if (pk.learn_gamma) {
      // d/dv with gamma = floor + exp(v).
      g.tail(pk.K) = rg.gamma.array() * (gg - pk.gamma_floor).array();
    }
    return rv.total;
  };

  OptimizeResult res;
  Eigen::VectorXd g(dim), g_new(dim);
  double f = 0.0;
  try {
    f = value_grad_at(v, g);
  } catch (const NumericError& e) {
    throw OptimizerError(std::string("optimize: risk not evaluable at the initial point (") +
                         e.what() + ")");
  }
  res.trace.push_back(f);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  auto search_direction = [&](const Eigen::VectorXd& grad) -> Eigen::VectorXd {
    Eigen::VectorXd q = grad;
    const int h = static_cast<int>(s_hist.size());
    std::vector<double> alpha(h);
    for (int i = h - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (h > 0) {
      const double scale = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= scale;
    }
    for (int i = 0; i < h; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    return -q;
  };

  const double c1 = 1e-4;
  bool stopped = false;
  for (int iter = 0; iter < options.max_iterations && !stopped; ++iter) {
    if (g.norm() <= options.grad_tol * (1.0 + std::abs(f))) {
      res.converged = true;
      res.message = "gradient norm below tolerance";
      break;
    }

    Eigen::VectorXd d = search_direction(g);
    double dg = d.dot(g);
    if (!(dg < 0.0) || !d.allFinite()) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      dg = -g.squaredNorm();
    }

    double step = (iter == 0) ? std::min(1.0, 1.0 / std::max(1.0, g.norm())) : 1.0;
    double f_trial = kInf;
    Eigen::VectorXd v_trial;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      v_trial = v + step * d;
      f_trial = value_at(v_trial);
      if (f_trial <= f + c1 * step * dg) {
        accepted = true;
        // The unit step can undershoot badly scaled valleys; grab a doubled
        // step when it keeps the same sufficient decrease.
        if (ls == 0) {
          const Eigen::VectorXd v_far = v + 2.0 * step * d;
          const double f_far = value_at(v_far);
          if (f_far <= f + c1 * 2.0 * step * dg && f_far < f_trial) {
            v_trial = v_far;
            f_trial = f_far;
            step *= 2.0;
          }
        }
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.message = "line search could not find a decreasing step";
      break;
    }

    const Eigen::VectorXd s = step * d;
    if (s.norm() <= options.step_tol * std::max(1.0, v.norm())) {
      v = v_trial;
      f = f_trial;
      res.trace.push_back(f);
      res.iterations = iter + 1;
      res.converged = true;
      res.message = "step size below tolerance";
      stopped = true;
      break;
    }

    double f_new = value_grad_at(v_trial, g_new);
    const Eigen::VectorXd y_vec = g_new - g;
    const double sy = s.dot(y_vec);
    if (sy > 1e-10 * s.norm() * y_vec.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    v = v_trial;
    f = f_new;
    g = g_new;
    res.trace.push_back(f);
    res.iterations = iter + 1;
  }
  if (res.message.empty()) res.message = "iteration budget exhausted";

  pk.unpack(v, res.x, res.theta, res.gamma, p.gamma);
  return res;
}

}  // namespace qffgp
