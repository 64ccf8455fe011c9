#include "qffgp/gp_deriv.hpp"

#include <cmath>
#include <sstream>

#include "qffgp/errors.hpp"

namespace qffgp {

void DerivObservationSet::validate() const {
  const Eigen::Index n = times.size();
  if (n < 1) throw DomainError("DerivObservationSet: empty time grid");
  if (y.size() != n || F.size() != n) {
    throw DomainError("DerivObservationSet: times, y and F must have equal length");
  }
  if (!(sigma2 > 0.0) || !(gamma > 0.0)) {
    throw DomainError("DerivObservationSet: noise variances must be positive");
  }
}

ExactGpDeriv::ExactGpDeriv(const DerivObservationSet& obs, const RbfHyperparams& h)
    : hyper_(h), times_(obs.times) {
  obs.validate();
  h.validate();
  const Eigen::Index n = times_.size();

  const KernelMatrices km = gram_matrices(h, times_);
  Eigen::MatrixXd K(2 * n, 2 * n);
  K.topLeftCorner(n, n) = km.C;
  K.topRightCorner(n, n) = km.Cp;
  K.bottomLeftCorner(n, n) = km.pC;
  K.bottomRightCorner(n, n) = km.Cpp;
  K.diagonal().head(n).array() += obs.sigma2;
  K.diagonal().tail(n).array() += obs.gamma;

  llt_.compute(K);
  if (llt_.info() != Eigen::Success) {
    const double min_pivot = K.ldlt().vectorD().minCoeff();
    std::ostringstream msg;
    msg << "ExactGpDeriv: 2Nx2N block system failed Cholesky (N = " << n
        << ", sigma2 = " << obs.sigma2 << ", gamma = " << obs.gamma
        << ", smallest pivot = " << min_pivot << ")";
    throw LinAlgError(msg.str());
  }

  Eigen::VectorXd rhs(2 * n);
  rhs.head(n) = obs.y;
  rhs.tail(n) = obs.F;
  alpha_ = llt_.solve(rhs);
}

PosteriorQuery ExactGpDeriv::query(double tau) const {
  const Eigen::Index n = times_.size();
  Eigen::VectorXd k_state(2 * n), k_deriv(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = times_[i] - tau;
    // cov with x(tau): [k(t_i,tau); d/dt_i k(t_i,tau)]
    k_state[i] = kernel_eval(hyper_, r);
    k_state[n + i] = kernel_d1(hyper_, r);
    // cov with x'(tau): [d/dtau k(t_i,tau); d2 k(t_i,tau)]
    k_deriv[i] = -kernel_d1(hyper_, r);
    k_deriv[n + i] = kernel_d2(hyper_, r);
  }

  PosteriorQuery q;
  q.tau = tau;
  q.mu = k_state.dot(alpha_);
  q.mu_prime = k_deriv.dot(alpha_);
  q.sigma = kernel_eval(hyper_, 0.0) - k_state.dot(llt_.solve(k_state));
  q.sigma_prime = kernel_d2(hyper_, 0.0) - k_deriv.dot(llt_.solve(k_deriv));
  return q;
}

FeatureGpDeriv::FeatureGpDeriv(const DerivObservationSet& obs, const FeatureMatrices& fm,
                               std::function<Eigen::VectorXd(double)> phi,
                               std::function<Eigen::VectorXd(double)> phi_prime)
    : phi_(std::move(phi)), phi_prime_(std::move(phi_prime)) {
  obs.validate();
  const Eigen::Index n = obs.times.size();
  const Eigen::Index d = fm.phi.rows();

  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(d, d);
  B.selfadjointView<Eigen::Lower>().rankUpdate(fm.phi, 1.0 / obs.sigma2);
  B.selfadjointView<Eigen::Lower>().rankUpdate(fm.phi_prime, 1.0 / obs.gamma);
  B = B.selfadjointView<Eigen::Lower>();

  llt_.compute(B);
  if (llt_.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "FeatureGpDeriv: M x M system failed Cholesky (M = " << d << ", N = " << n << ")";
    throw LinAlgError(msg.str());
  }
  weights_ = llt_.solve(fm.phi * obs.y / obs.sigma2 + fm.phi_prime * obs.F / obs.gamma);
}

FeatureGpDeriv::FeatureGpDeriv(const DerivObservationSet& obs, const QffFeatureMap& map)
    : FeatureGpDeriv(
          obs, qff_matrices(map, obs.times), [map](double t) { return map.phi(t); },
          [map](double t) { return map.phi_prime(t); }) {}

FeatureGpDeriv::FeatureGpDeriv(const DerivObservationSet& obs, const RandomFeatureMap& map)
    : FeatureGpDeriv(
          obs, rff_matrices(map, obs.times), [map](double t) { return map.phi(t); },
          [map](double t) { return map.phi_prime(t); }) {}

PosteriorQuery FeatureGpDeriv::query(double tau) const {
  const Eigen::VectorXd p = phi_(tau);
  const Eigen::VectorXd pp = phi_prime_(tau);

  PosteriorQuery q;
  q.tau = tau;
  q.mu = p.dot(weights_);
  q.mu_prime = pp.dot(weights_);
  q.sigma = p.dot(llt_.solve(p));
  q.sigma_prime = pp.dot(llt_.solve(pp));
  return q;
}

PosteriorQuery exact_posterior(const DerivObservationSet& obs, const RbfHyperparams& h,
                               double tau) {
  return ExactGpDeriv(obs, h).query(tau);
}

PosteriorQuery approx_posterior(const DerivObservationSet& obs, const QffFeatureMap& map,
                                double tau) {
  return FeatureGpDeriv(obs, map).query(tau);
}

}  // namespace qffgp
