#include "qffgp/risk.hpp"

#include <cmath>
#include <sstream>

#include "qffgp/errors.hpp"

namespace qffgp {

double OdinProblem::gamma_floor_at(int k) const {
  if (gamma_floor.size() == static_cast<Eigen::Index>(hyper.size())) return gamma_floor[k];
  const double l2 = hyper[k].lengthscale * hyper[k].lengthscale;
  return 1e-6 * hyper[k].variance / l2;
}

void OdinProblem::validate() const {
  if (system == nullptr) throw DomainError("OdinProblem: missing system");
  const int n = num_times();
  const int k = num_dims();
  if (n < 1 || k < 1) throw DomainError("OdinProblem: empty observations");
  if (y.rows() != n) throw DomainError("OdinProblem: y rows must match times");
  if (k != system->state_dim) {
    throw DomainError("OdinProblem: observation dimension does not match the system");
  }
  if (static_cast<int>(hyper.size()) != k || sigma2.size() != k || gamma.size() != k ||
      jitter.size() != k) {
    throw DomainError("OdinProblem: per-dimension parameter lists must have K entries");
  }
  for (const auto& h : hyper) h.validate();
  if (!(sigma2.minCoeff() > 0.0) || !(gamma.minCoeff() > 0.0) || !(jitter.minCoeff() > 0.0)) {
    throw DomainError("OdinProblem: sigma2, gamma and jitter must be positive");
  }
  if (!(time_scale > 0.0)) throw DomainError("OdinProblem: time_scale must be positive");
}

OdinProblem make_problem(const OdeSystem& sys, const Dataset& data,
                         const std::vector<RbfHyperparams>& hyper,
                         const Eigen::VectorXd& sigma2, bool learn_gamma) {
  OdinProblem p;
  p.system = &sys;
  const double t0 = data.times[0];
  const double t1 = data.times[data.times.size() - 1];
  p.time_scale = t1 - t0;
  if (!(p.time_scale > 0.0)) throw DomainError("make_problem: degenerate time span");
  p.times_unit = (data.times.array() - t0) / p.time_scale;
  p.y = data.y;
  p.hyper = hyper;
  p.sigma2 = sigma2;
  p.gamma = sigma2;  // learned-gamma initialization ties mismatch to noise scale
  p.jitter.resize(hyper.size());
  for (std::size_t k = 0; k < hyper.size(); ++k) p.jitter[k] = default_jitter(hyper[k]);
  p.learn_gamma = learn_gamma;
  p.validate();
  return p;
}

RiskEvaluator::RiskEvaluator(std::shared_ptr<const OdinProblem> problem)
    : problem_(std::move(problem)) {
  problem_->validate();
}

RiskValue RiskEvaluator::value(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
  return evaluate(x, theta, problem_->gamma, nullptr);
}

RiskValue RiskEvaluator::value(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& gamma) {
  return evaluate(x, theta, gamma, nullptr);
}

RiskValue RiskEvaluator::value_and_grad(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& gamma, RiskGradient& grad) {
  return evaluate(x, theta, gamma, &grad);
}

RiskValue RiskEvaluator::evaluate(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta,
                                  const Eigen::VectorXd& gamma, RiskGradient* grad) {
  const OdinProblem& p = *problem_;
  const int n = p.num_times();
  const int K = p.num_dims();
  const int P = p.system->param_dim;
  const double s = p.time_scale;

  if (x.rows() != n || x.cols() != K) throw DomainError("risk: state matrix must be N x K");
  if (theta.size() != P) throw DomainError("risk: theta dimension mismatch");
  if (gamma.size() != K || !(gamma.minCoeff() > 0.0)) {
    throw DomainError("risk: gamma must be K positive values");
  }
  if (!x.allFinite() || !theta.allFinite()) {
    throw NumericError("risk: non-finite state or parameter input");
  }

  // Model derivatives, rescaled to the unit time axis.
  Eigen::MatrixXd f_model(n, K);
  {
    Eigen::VectorXd xi(K), dxi(K);
    for (int i = 0; i < n; ++i) {
      xi = x.row(i);
      p.system->rhs(xi, theta, dxi);
      f_model.row(i) = s * dxi.transpose();
    }
  }
  if (!f_model.allFinite()) {
    throw NumericError("risk: dynamics returned non-finite values");
  }

  RiskValue rv;
  Eigen::MatrixXd q(n, K);  // (A + gamma I)^{-1} z per dimension
  Eigen::VectorXd work(n), z(n), qk(n);

  if (grad) {
    grad->x.setZero(n, K);
    grad->theta.setZero(P);
    grad->gamma.setZero(K);
  }

  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd xk = x.col(k);

    Eigen::VectorXd prior_grad;
    rv.prior_term += prior_quad(k, xk, grad ? &prior_grad : nullptr);

    const Eigen::VectorXd resid = xk - p.y.col(k);
    rv.obs_term += resid.squaredNorm() / p.sigma2[k];

    apply_D(k, xk, work);
    z = f_model.col(k) - work;

    prepare_gamma(k, gamma[k]);
    rv.deriv_term += deriv_quad(k, z, qk);
    q.col(k) = qk;

    if (p.learn_gamma) rv.logdet_term += logdet_deriv_system(k);

    if (grad) {
      grad->x.col(k) += prior_grad + 2.0 * resid / p.sigma2[k];
      apply_Dt(k, qk, work);
      grad->x.col(k) -= 2.0 * work;
      if (p.learn_gamma) {
        grad->gamma[k] = -qk.squaredNorm() + trace_inv_deriv_system(k);
      }
    }
  }

  if (grad) {
    // Couple the model Jacobians into the state and parameter gradients.
    Eigen::VectorXd xi(K);
    Eigen::MatrixXd jx(K, K), jt(K, P);
    for (int i = 0; i < n; ++i) {
      xi = x.row(i);
      p.system->jac_state(xi, theta, jx);
      p.system->jac_params(xi, theta, jt);
      const Eigen::RowVectorXd qi = q.row(i);
      grad->x.row(i) += 2.0 * s * (qi * jx);
      grad->theta += 2.0 * s * (qi * jt).transpose();
    }
  }

  rv.total = rv.prior_term + rv.obs_term + rv.deriv_term + rv.logdet_term;
  if (!std::isfinite(rv.total)) throw NumericError("risk: objective evaluated to non-finite");
  return rv;
}

// ---------------------------------------------------------------------------
// Dense reference backend
// ---------------------------------------------------------------------------

ExactRiskEvaluator::ExactRiskEvaluator(std::shared_ptr<const OdinProblem> problem)
    : RiskEvaluator(std::move(problem)) {
  const OdinProblem& p = *problem_;
  const int K = p.num_dims();
  llt_prior_.resize(K);
  models_.reserve(K);
  llt_deriv_.resize(K);
  prepared_gamma_.assign(K, -1.0);
  for (int k = 0; k < K; ++k) {
    const KernelMatrices km = gram_matrices(p.hyper[k], p.times_unit);
    Eigen::MatrixXd Cj = km.C;
    Cj.diagonal().array() += p.jitter[k];
    llt_prior_[k].compute(Cj);
    if (llt_prior_[k].info() != Eigen::Success) {
      throw LinAlgError("ExactRiskEvaluator: C + jitter I failed Cholesky for dimension " +
                        std::to_string(k));
    }
    models_.push_back(model_matrices(km, p.jitter[k]));
  }
}

double ExactRiskEvaluator::prior_quad(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  const Eigen::VectorXd sol = llt_prior_[k].solve(x);
  if (grad) *grad = 2.0 * sol;
  return x.dot(sol);
}

void ExactRiskEvaluator::apply_D(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  out.noalias() = models_[k].D * v;
}

void ExactRiskEvaluator::apply_Dt(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  out.noalias() = models_[k].D.transpose() * v;
}

void ExactRiskEvaluator::prepare_gamma(int k, double gamma) {
  if (prepared_gamma_[k] == gamma) return;
  Eigen::MatrixXd Ag = models_[k].A;
  Ag.diagonal().array() += gamma;
  llt_deriv_[k].compute(Ag);
  if (llt_deriv_[k].info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "ExactRiskEvaluator: A + gamma I failed Cholesky (gamma = " << gamma << ", dimension "
        << k << ")";
    throw LinAlgError(msg.str());
  }
  prepared_gamma_[k] = gamma;
}

double ExactRiskEvaluator::deriv_quad(int k, const Eigen::VectorXd& z, Eigen::VectorXd& q) {
  q = llt_deriv_[k].solve(z);
  return z.dot(q);
}

double ExactRiskEvaluator::logdet_deriv_system(int k) {
  return 2.0 * llt_deriv_[k].matrixLLT().diagonal().array().log().sum();
}

double ExactRiskEvaluator::trace_inv_deriv_system(int k) {
  // tr(K^{-1}) = ||L^{-1}||_F^2 from the Cholesky factor.
  const int n = problem_->num_times();
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n, n);
  llt_deriv_[k].matrixL().solveInPlace(linv);
  return linv.squaredNorm();
}

// ---------------------------------------------------------------------------
// Low-rank feature backend
// ---------------------------------------------------------------------------

namespace {
std::vector<FeatureMatrices> assemble_qff_features(const OdinProblem& p,
                                                   const std::vector<QffFeatureMap>& maps) {
  if (maps.size() != p.hyper.size()) {
    throw DomainError("FeatureRiskEvaluator: need one feature map per dimension");
  }
  std::vector<FeatureMatrices> out;
  out.reserve(maps.size());
  for (const auto& map : maps) out.push_back(qff_matrices(map, p.times_unit));
  return out;
}
}  // namespace

FeatureRiskEvaluator::FeatureRiskEvaluator(std::shared_ptr<const OdinProblem> problem,
                                           const std::vector<QffFeatureMap>& maps)
    : FeatureRiskEvaluator(problem, assemble_qff_features(*problem, maps)) {}

FeatureRiskEvaluator::FeatureRiskEvaluator(std::shared_ptr<const OdinProblem> problem,
                                           const std::vector<FeatureMatrices>& features)
    : RiskEvaluator(std::move(problem)) {
  const OdinProblem& p = *problem_;
  const int K = p.num_dims();
  if (static_cast<int>(features.size()) != K) {
    throw DomainError("FeatureRiskEvaluator: need one feature matrix set per dimension");
  }
  dims_.resize(K);
  for (int k = 0; k < K; ++k) {
    const FeatureMatrices& fm = features[k];
    Dim& d = dims_[k];
    const int M = static_cast<int>(fm.phi.rows());
    d.phi = fm.phi;
    d.phi_prime = fm.phi_prime;
    d.G = Eigen::MatrixXd::Zero(M, M);
    d.G.selfadjointView<Eigen::Lower>().rankUpdate(d.phi, 1.0);
    d.G = d.G.selfadjointView<Eigen::Lower>();
    d.G.diagonal().array() += p.jitter[k];
    d.phip_gram = Eigen::MatrixXd::Zero(M, M);
    d.phip_gram.selfadjointView<Eigen::Lower>().rankUpdate(d.phi_prime, 1.0);
    d.phip_gram = d.phip_gram.selfadjointView<Eigen::Lower>();
    d.llt_G.compute(d.G);
    if (d.llt_G.info() != Eigen::Success) {
      throw LinAlgError("FeatureRiskEvaluator: feature Gram system failed Cholesky for dimension " +
                        std::to_string(k));
    }
    d.logdet_G = 2.0 * d.llt_G.matrixLLT().diagonal().array().log().sum();
  }
}

double FeatureRiskEvaluator::prior_quad(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  const Dim& d = dims_[k];
  const double lambda = problem_->jitter[k];
  const Eigen::VectorXd px = d.phi * x;
  const Eigen::VectorXd u = d.llt_G.solve(px);
  if (grad) *grad = (2.0 / lambda) * (x - d.phi.transpose() * u);
  return (x.squaredNorm() - px.dot(u)) / lambda;
}

void FeatureRiskEvaluator::apply_D(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  const Dim& d = dims_[k];
  out.noalias() = d.phi_prime.transpose() * d.llt_G.solve(d.phi * v);
}

void FeatureRiskEvaluator::apply_Dt(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  const Dim& d = dims_[k];
  out.noalias() = d.phi.transpose() * d.llt_G.solve(d.phi_prime * v);
}

void FeatureRiskEvaluator::prepare_gamma(int k, double gamma) {
  Dim& d = dims_[k];
  if (d.prepared_gamma == gamma) return;
  const double lambda = problem_->jitter[k];
  Eigen::MatrixXd H = d.phip_gram + (gamma / lambda) * d.G;
  d.llt_H.compute(H);
  if (d.llt_H.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "FeatureRiskEvaluator: 2m x 2m derivative system failed Cholesky (gamma = " << gamma
        << ", dimension " << k << ")";
    throw LinAlgError(msg.str());
  }
  d.prepared_gamma = gamma;
}

double FeatureRiskEvaluator::deriv_quad(int k, const Eigen::VectorXd& z, Eigen::VectorXd& q) {
  const Dim& d = dims_[k];
  const double gamma = d.prepared_gamma;
  const Eigen::VectorXd v = d.phi_prime * z;
  const Eigen::VectorXd w = d.llt_H.solve(v);
  q = (z - d.phi_prime.transpose() * w) / gamma;
  return (z.squaredNorm() - v.dot(w)) / gamma;
}

double FeatureRiskEvaluator::logdet_deriv_system(int k) {
  // det(A~ + g I) = g^{N-2m} lambda^{2m} det(H) / det(G) via the low-rank
  // determinant identity applied to A~ + g I = g I + lambda Phi'^T G^{-1} Phi'.
  const Dim& d = dims_[k];
  const int n = problem_->num_times();
  const int M = static_cast<int>(d.G.rows());
  const double lambda = problem_->jitter[k];
  const double logdet_H = 2.0 * d.llt_H.matrixLLT().diagonal().array().log().sum();
  return (n - M) * std::log(d.prepared_gamma) + M * std::log(lambda) + logdet_H - d.logdet_G;
}

double FeatureRiskEvaluator::trace_inv_deriv_system(int k) {
  const Dim& d = dims_[k];
  const int n = problem_->num_times();
  const double tr_small = d.llt_H.solve(d.phip_gram).trace();
  return (n - tr_small) / d.prepared_gamma;
}

RiskValue exact_risk(const OdinProblem& p, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& theta) {
  ExactRiskEvaluator eval(std::make_shared<const OdinProblem>(p));
  return eval.value(x, theta);
}

RiskValue feature_risk(const OdinProblem& p, const std::vector<QffFeatureMap>& maps,
                       const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
  FeatureRiskEvaluator eval(std::make_shared<const OdinProblem>(p), maps);
  return eval.value(x, theta);
}

std::vector<QffFeatureMap> problem_feature_maps(const OdinProblem& p, int order) {
  std::vector<QffFeatureMap> maps;
  maps.reserve(p.hyper.size());
  for (const auto& h : p.hyper) maps.emplace_back(h, order);
  return maps;
}

}  // namespace qffgp
