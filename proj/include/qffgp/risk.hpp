#ifndef QFFGP_RISK_HPP
#define QFFGP_RISK_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <memory>
#include <vector>

#include "qffgp/dataset.hpp"
#include "qffgp/features.hpp"
#include "qffgp/ode_system.hpp"
#include "qffgp/rbf_kernel.hpp"

namespace qffgp {

/// Gradient-matching inference problem: per-dimension GP priors over the
/// latent states, an observation model and the ODE constraint in place of
/// derivative observations. Observation times live on the rescaled unit
/// interval; time_scale carries d(original time)/d(unit time), so the model
/// derivative entering the risk is time_scale * f(x, theta).
struct OdinProblem {
  const OdeSystem* system = nullptr;
  Eigen::VectorXd times_unit;  // N, in [0, 1]
  double time_scale = 1.0;
  Eigen::MatrixXd y;                    // N x K
  std::vector<RbfHyperparams> hyper;    // K
  Eigen::VectorXd sigma2;               // K
  Eigen::VectorXd gamma;                // K
  Eigen::VectorXd jitter;               // K
  bool learn_gamma = false;
  /// Lower bound for learned gamma (empty: the default rule below). Without
  /// a floor the log-det term rewards gamma -> 0 along the near-null
  /// directions of A and the learned-gamma objective is unbounded below.
  Eigen::VectorXd gamma_floor;

  int num_times() const { return static_cast<int>(times_unit.size()); }
  int num_dims() const { return static_cast<int>(y.cols()); }
  /// Floor for dimension k: configured value, or 1e-6 * rho_k / l_k^2 (the
  /// jitter rule applied at the derivative-block scale).
  double gamma_floor_at(int k) const;
  void validate() const;
};

/// Convenience assembly from a generated dataset: rescales times to [0, 1],
/// wires per-dimension hyperparameters/noise and defaults gamma_k to
/// sigma2_k and jitter_k to 1e-6 * rho_k.
OdinProblem make_problem(const OdeSystem& sys, const Dataset& data,
                         const std::vector<RbfHyperparams>& hyper,
                         const Eigen::VectorXd& sigma2, bool learn_gamma);

/// Value of the objective split into its terms; total is their sum. The
/// quadratic terms are nonnegative; logdet is present only when gamma is
/// learned.
struct RiskValue {
  double total = 0.0;
  double prior_term = 0.0;
  double obs_term = 0.0;
  double deriv_term = 0.0;
  double logdet_term = 0.0;
};

/// Gradient of the risk in the same layout as the variables.
struct RiskGradient {
  Eigen::MatrixXd x;      // N x K
  Eigen::VectorXd theta;  // P
  Eigen::VectorXd gamma;  // K, d/dgamma (only filled when gamma is learned)
};

/// Shared driver over the per-dimension linear-algebra backends. A single
/// evaluator instance is not safe for concurrent evaluation (it caches the
/// gamma-dependent factorization); give each worker its own instance.
class RiskEvaluator {
 public:
  virtual ~RiskEvaluator() = default;

  const OdinProblem& problem() const { return *problem_; }

  RiskValue value(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta);
  RiskValue value(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta,
                  const Eigen::VectorXd& gamma);
  RiskValue value_and_grad(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& gamma, RiskGradient& grad);

 protected:
  explicit RiskEvaluator(std::shared_ptr<const OdinProblem> problem);

  // Per-dimension hooks. prior_quad returns x^T (C + jitter I)^{-1} x and, if
  // grad is non-null, writes 2 (C + jitter I)^{-1} x. deriv_quad returns
  // z^T (A + gamma I)^{-1} z for the gamma prepared last and writes
  // q = (A + gamma I)^{-1} z.
  virtual double prior_quad(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad) = 0;
  virtual void apply_D(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) = 0;
  virtual void apply_Dt(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) = 0;
  virtual void prepare_gamma(int k, double gamma) = 0;
  virtual double deriv_quad(int k, const Eigen::VectorXd& z, Eigen::VectorXd& q) = 0;
  virtual double logdet_deriv_system(int k) = 0;  // log det(A + gamma I)
  virtual double trace_inv_deriv_system(int k) = 0;  // tr((A + gamma I)^{-1})

  std::shared_ptr<const OdinProblem> problem_;

 private:
  RiskValue evaluate(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& gamma, RiskGradient* grad);
};

/// Dense reference: O(N^3) factorizations, exact arithmetic path.
class ExactRiskEvaluator final : public RiskEvaluator {
 public:
  explicit ExactRiskEvaluator(std::shared_ptr<const OdinProblem> problem);

  const GpDerivModelMatrices& model(int k) const { return models_[k]; }

 protected:
  double prior_quad(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad) override;
  void apply_D(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) override;
  void apply_Dt(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) override;
  void prepare_gamma(int k, double gamma) override;
  double deriv_quad(int k, const Eigen::VectorXd& z, Eigen::VectorXd& q) override;
  double logdet_deriv_system(int k) override;
  double trace_inv_deriv_system(int k) override;

 private:
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt_prior_;  // C + jitter I
  std::vector<GpDerivModelMatrices> models_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt_deriv_;  // A + gamma I
  std::vector<double> prepared_gamma_;
};

/// Low-rank path: every solve happens on a 2m x 2m system, cost
/// O(N m^2 + m^3) per evaluation; no N x N matrix is formed.
class FeatureRiskEvaluator final : public RiskEvaluator {
 public:
  FeatureRiskEvaluator(std::shared_ptr<const OdinProblem> problem,
                       const std::vector<QffFeatureMap>& maps);
  /// Backend over arbitrary per-dimension feature matrices (randomized
  /// baselines use this one).
  FeatureRiskEvaluator(std::shared_ptr<const OdinProblem> problem,
                       const std::vector<FeatureMatrices>& features);

 protected:
  double prior_quad(int k, const Eigen::VectorXd& x, Eigen::VectorXd* grad) override;
  void apply_D(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) override;
  void apply_Dt(int k, const Eigen::VectorXd& v, Eigen::VectorXd& out) override;
  void prepare_gamma(int k, double gamma) override;
  double deriv_quad(int k, const Eigen::VectorXd& z, Eigen::VectorXd& q) override;
  double logdet_deriv_system(int k) override;
  double trace_inv_deriv_system(int k) override;

 private:
  struct Dim {
    Eigen::MatrixXd phi;        // 2m x N
    Eigen::MatrixXd phi_prime;  // 2m x N
    Eigen::MatrixXd G;          // phi phi^T + jitter I
    Eigen::MatrixXd phip_gram;  // phi' phi'^T
    Eigen::LLT<Eigen::MatrixXd> llt_G;
    double logdet_G = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_H;  // phi' phi'^T + (gamma/jitter) G
    double prepared_gamma = -1.0;
  };
  std::vector<Dim> dims_;
};

/// One-shot risk values per the module operations. For repeated evaluation
/// (optimization, sweeps) construct an evaluator once instead.
RiskValue exact_risk(const OdinProblem& p, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& theta);
RiskValue feature_risk(const OdinProblem& p, const std::vector<QffFeatureMap>& maps,
                       const Eigen::MatrixXd& x, const Eigen::VectorXd& theta);

/// Per-dimension feature maps of order m for a problem's hyperparameters.
std::vector<QffFeatureMap> problem_feature_maps(const OdinProblem& p, int order);

}  // namespace qffgp

#endif  // QFFGP_RISK_HPP
