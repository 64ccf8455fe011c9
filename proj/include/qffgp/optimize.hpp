#ifndef QFFGP_OPTIMIZE_HPP
#define QFFGP_OPTIMIZE_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "qffgp/risk.hpp"

namespace qffgp {

struct OptimizeOptions {
  int max_iterations = 5000;
  double grad_tol = 1e-6;   // stop when ||g|| < grad_tol * (1 + |R|)
  double step_tol = 1e-10;  // stop when the accepted step falls below this
  int memory = 15;          // L-BFGS history length
};

struct OptimizeResult {
  Eigen::MatrixXd x;
  Eigen::VectorXd theta;
  Eigen::VectorXd gamma;      // final per-dimension gamma (problem's when fixed)
  std::vector<double> trace;  // risk at the start plus after every accepted step
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Joint quasi-Newton descent over (x, theta) -- and log(gamma) when the
/// problem learns gamma -- on the evaluator's risk. Limited-memory BFGS with
/// Armijo backtracking; the trace is non-increasing after each accepted
/// step. Non-finite risks during the line search shrink the step; a
/// non-finite risk at the initial point throws OptimizerError carrying the
/// last valid iterate description.
OptimizeResult optimize(RiskEvaluator& eval, const Eigen::MatrixXd& x0,
                        const Eigen::VectorXd& theta0, const OptimizeOptions& options = {});

}  // namespace qffgp

#endif  // QFFGP_OPTIMIZE_HPP
