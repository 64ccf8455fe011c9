#ifndef QFFGP_HYPERFIT_HPP
#define QFFGP_HYPERFIT_HPP

#include <Eigen/Core>
#include <vector>

#include "qffgp/rbf_kernel.hpp"

namespace qffgp {

/// Marginal-likelihood hyperparameter fit for one observed dimension:
/// maximizes log N(y | 0, C + sigma2 I) over log-parameterized
/// (rho, l, sigma2) with a small multi-start set.
struct FitOptions {
  bool use_features = false;  // low-rank objective instead of the dense one
  int feature_order = 96;     // quadrature order for the low-rank objective
  int max_points = 300;       // dense path subsamples the grid beyond this
  double l_min = 0.02;
  double l_max = 1.0;
  double rho_min = 1e-8;
  double rho_max = 1e8;
  double sigma2_min = 1e-10;
  double sigma2_max = 1e6;
  int nm_max_iters = 160;     // Nelder-Mead budget per start
};

struct FittedHyper {
  RbfHyperparams hyper;
  double sigma2 = 0.0;
  double objective = 0.0;  // negative log marginal likelihood at the optimum
};

/// Times are expected on the rescaled [0, 1] axis; the fitted lengthscale is
/// reported in those units. Requires at least 3 points. Throws FitError with
/// the per-start objective trace if every start diverges.
FittedHyper fit_hyperparams(const Eigen::VectorXd& y, const Eigen::VectorXd& times_unit,
                            const FitOptions& options = {});

/// Column-wise fit for a multivariate observation matrix.
std::vector<FittedHyper> fit_hyperparams_all(const Eigen::MatrixXd& y,
                                             const Eigen::VectorXd& times_unit,
                                             const FitOptions& options = {});

/// Negative log marginal likelihood evaluators (exposed for paired
/// dense-vs-feature agreement checks).
double nll_dense(const Eigen::VectorXd& y, const Eigen::VectorXd& times_unit,
                 const RbfHyperparams& h, double sigma2);
double nll_features(const Eigen::VectorXd& y, const Eigen::VectorXd& times_unit,
                    const RbfHyperparams& h, double sigma2, int order);

}  // namespace qffgp

#endif  // QFFGP_HYPERFIT_HPP
