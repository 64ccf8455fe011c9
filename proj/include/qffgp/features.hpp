#ifndef QFFGP_FEATURES_HPP
#define QFFGP_FEATURES_HPP

#include <Eigen/Core>
#include <cstdint>
#include <memory>

#include "qffgp/quadrature.hpp"
#include "qffgp/rbf_kernel.hpp"

namespace qffgp {

/// Deterministic quadrature Fourier features for the RBF kernel.
///
/// Component pair i of the 2m-dimensional feature vector is
///   [ a_i cos(nu_i t), a_i sin(nu_i t) ],  a_i = sqrt(variance * W_i / sqrt(pi)),
///   nu_i = w_i * sqrt(2) / lengthscale,
/// so that phi(s)^T phi(t) is the order-m quadrature approximation of k(s-t).
/// The general-variance scaling is folded into the weights, keeping all
/// downstream formulas variance-free. Immutable after construction.
class QffFeatureMap {
 public:
  QffFeatureMap(const RbfHyperparams& h, std::shared_ptr<const QuadratureRule> rule);
  /// Convenience: fetches the order-m rule from the registry.
  QffFeatureMap(const RbfHyperparams& h, int order);

  int order() const { return rule_->order; }
  int feature_dim() const { return 2 * rule_->order; }
  const RbfHyperparams& hyperparams() const { return hyper_; }
  const QuadratureRule& rule() const { return *rule_; }

  Eigen::VectorXd phi(double t) const;
  Eigen::VectorXd phi_prime(double t) const;
  /// Writes phi(t) / phi'(t) into preallocated columns (assembly hot path).
  void phi_into(double t, Eigen::Ref<Eigen::VectorXd> out) const;
  void phi_prime_into(double t, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  RbfHyperparams hyper_;
  std::shared_ptr<const QuadratureRule> rule_;
  Eigen::VectorXd amp_;   // sqrt(variance * W_i / sqrt(pi))
  Eigen::VectorXd freq_;  // w_i * sqrt(2) / lengthscale
};

/// Randomized Fourier feature baselines.
///
/// kRff samples frequencies from the kernel's spectral density (normal with
/// variance 1/2 under the sqrt(2)/l scaling shared with the quadrature
/// features) and emits a [cos, sin] pair of amplitude sqrt(variance/s) per
/// sample. kRffBias additionally samples a phase b ~ U[0, 2pi) and emits the
/// single feature sqrt(2*variance/s) * cos(nu t + b) per sample.
/// Derivative features are the analytic t-derivatives of the same expansion.
/// Identical seed implies an identical map.
enum class RandomFeatureKind { kRff, kRffBias };

class RandomFeatureMap {
 public:
  RandomFeatureMap(RandomFeatureKind kind, const RbfHyperparams& h, int num_samples,
                   std::uint64_t seed);

  RandomFeatureKind kind() const { return kind_; }
  int num_samples() const { return static_cast<int>(freq_.size()); }
  int feature_dim() const;
  std::uint64_t seed() const { return seed_; }
  const RbfHyperparams& hyperparams() const { return hyper_; }
  const Eigen::VectorXd& frequencies() const { return freq_; }
  const Eigen::VectorXd& biases() const { return bias_; }

  Eigen::VectorXd phi(double t) const;
  Eigen::VectorXd phi_prime(double t) const;

 private:
  RandomFeatureKind kind_;
  RbfHyperparams hyper_;
  std::uint64_t seed_;
  double amp_ = 0.0;
  Eigen::VectorXd freq_;  // already scaled by sqrt(2)/l
  Eigen::VectorXd bias_;  // kRffBias only
};

/// Feature matrices on a time grid: columns are phi(t_i) / phi'(t_i).
/// Phi^T Phi approximates C, PhiPrime^T Phi approximates pC,
/// Phi^T PhiPrime approximates Cp and PhiPrime^T PhiPrime approximates Cpp.
struct FeatureMatrices {
  Eigen::MatrixXd phi;        // feature_dim x N
  Eigen::MatrixXd phi_prime;  // feature_dim x N
};

FeatureMatrices qff_matrices(const QffFeatureMap& map, const Eigen::VectorXd& times);
FeatureMatrices rff_matrices(const RandomFeatureMap& map, const Eigen::VectorXd& times);

}  // namespace qffgp

#endif  // QFFGP_FEATURES_HPP
