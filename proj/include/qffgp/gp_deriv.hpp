#ifndef QFFGP_GP_DERIV_HPP
#define QFFGP_GP_DERIV_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <functional>

#include "qffgp/features.hpp"
#include "qffgp/rbf_kernel.hpp"

namespace qffgp {

/// Noisy state and derivative observations on a common time grid. Times are
/// expected on a rescaled [0, 1] domain (the error bounds hold there); the
/// noise variances are sigma2 for states and gamma for derivatives.
struct DerivObservationSet {
  Eigen::VectorXd times;
  Eigen::VectorXd y;  // state observations
  Eigen::VectorXd F;  // derivative observations
  double sigma2 = 0.0;
  double gamma = 0.0;

  void validate() const;
};

/// Posterior state/derivative mean and variance at a query time.
struct PosteriorQuery {
  double tau = 0.0;
  double mu = 0.0;
  double sigma = 0.0;  // Var[x(tau)]
  double mu_prime = 0.0;
  double sigma_prime = 0.0;  // Var[x'(tau)]
};

/// Exact GP posterior conditioning jointly on y and F through the 2N x 2N
/// block system [[C, Cp],[pC, Cpp]] + diag(sigma2 I, gamma I). Factorized
/// once; queries at different tau are independent and safe to run
/// concurrently.
class ExactGpDeriv {
 public:
  ExactGpDeriv(const DerivObservationSet& obs, const RbfHyperparams& h);
  PosteriorQuery query(double tau) const;

 private:
  RbfHyperparams hyper_;
  Eigen::VectorXd times_;
  Eigen::LLT<Eigen::MatrixXd> llt_;   // of the 2N x 2N block system
  Eigen::VectorXd alpha_;             // K^{-1} [y; F]
};

/// Weight-space posterior over the feature coefficients:
///   B = I + Phi Phi^T / sigma2 + Phi' Phi'^T / gamma   (M x M),
///   w = B^{-1} (Phi y / sigma2 + Phi' F / gamma),
/// algebraically identical to substituting the feature kernel into the exact
/// formulas via the matrix inversion lemma, at cost O(N M^2 + M^3). The
/// observation noise plays the regularizer role, so no jitter is needed and
/// no N x N matrix is ever formed. Works for the deterministic quadrature
/// features and for the randomized baselines alike.
class FeatureGpDeriv {
 public:
  FeatureGpDeriv(const DerivObservationSet& obs, const QffFeatureMap& map);
  FeatureGpDeriv(const DerivObservationSet& obs, const RandomFeatureMap& map);
  PosteriorQuery query(double tau) const;

 private:
  FeatureGpDeriv(const DerivObservationSet& obs, const FeatureMatrices& fm,
                 std::function<Eigen::VectorXd(double)> phi,
                 std::function<Eigen::VectorXd(double)> phi_prime);

  std::function<Eigen::VectorXd(double)> phi_;
  std::function<Eigen::VectorXd(double)> phi_prime_;
  Eigen::LLT<Eigen::MatrixXd> llt_;  // of B
  Eigen::VectorXd weights_;          // posterior mean coefficients
};

/// One-shot conveniences for single queries.
PosteriorQuery exact_posterior(const DerivObservationSet& obs, const RbfHyperparams& h,
                               double tau);
PosteriorQuery approx_posterior(const DerivObservationSet& obs, const QffFeatureMap& map,
                                double tau);

}  // namespace qffgp

#endif  // QFFGP_GP_DERIV_HPP
