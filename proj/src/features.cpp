#include "qffgp/features.hpp"

#include <cmath>

#include "qffgp/errors.hpp"
#include "qffgp/rng.hpp"

namespace qffgp {

namespace {
constexpr double kSqrtPi = 1.7724538509055160272981674833411;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kTwoPi = 6.2831853071795864769252867665590;
}  // namespace

QffFeatureMap::QffFeatureMap(const RbfHyperparams& h, std::shared_ptr<const QuadratureRule> rule)
    : hyper_(h), rule_(std::move(rule)) {
  hyper_.validate();
  if (!rule_) throw DomainError("QffFeatureMap: null quadrature rule");
  const int m = rule_->order;
  amp_.resize(m);
  freq_.resize(m);
  const double scale = kSqrt2 / hyper_.lengthscale;
  for (int i = 0; i < m; ++i) {
    amp_[i] = std::sqrt(hyper_.variance * rule_->weights[i] / kSqrtPi);
    freq_[i] = rule_->nodes[i] * scale;
  }
}

QffFeatureMap::QffFeatureMap(const RbfHyperparams& h, int order)
    : QffFeatureMap(h, cached_rule(order)) {}

void QffFeatureMap::phi_into(double t, Eigen::Ref<Eigen::VectorXd> out) const {
  const int m = rule_->order;
  for (int i = 0; i < m; ++i) {
    const double arg = freq_[i] * t;
    out[2 * i] = amp_[i] * std::cos(arg);
    out[2 * i + 1] = amp_[i] * std::sin(arg);
  }
}

void QffFeatureMap::phi_prime_into(double t, Eigen::Ref<Eigen::VectorXd> out) const {
  const int m = rule_->order;
  for (int i = 0; i < m; ++i) {
    const double arg = freq_[i] * t;
    out[2 * i] = -amp_[i] * freq_[i] * std::sin(arg);
    out[2 * i + 1] = amp_[i] * freq_[i] * std::cos(arg);
  }
}

Eigen::VectorXd QffFeatureMap::phi(double t) const {
  Eigen::VectorXd out(feature_dim());
  phi_into(t, out);
  return out;
}

Eigen::VectorXd QffFeatureMap::phi_prime(double t) const {
  Eigen::VectorXd out(feature_dim());
  phi_prime_into(t, out);
  return out;
}

RandomFeatureMap::RandomFeatureMap(RandomFeatureKind kind, const RbfHyperparams& h,
                                   int num_samples, std::uint64_t seed)
    : kind_(kind), hyper_(h), seed_(seed) {
  hyper_.validate();
  if (num_samples < 1) throw DomainError("RandomFeatureMap: need at least one sample");

  SplitMix64 rng(seed);
  const double scale = kSqrt2 / hyper_.lengthscale;
  freq_.resize(num_samples);
  for (int i = 0; i < num_samples; ++i) {
    // Spectral density of the quadrature weight e^{-w^2}: normal, variance 1/2.
    freq_[i] = rng.next_normal() / kSqrt2 * scale;
  }
  if (kind_ == RandomFeatureKind::kRffBias) {
    bias_.resize(num_samples);
    for (int i = 0; i < num_samples; ++i) bias_[i] = kTwoPi * rng.next_uniform();
    amp_ = std::sqrt(2.0 * hyper_.variance / num_samples);
  } else {
    amp_ = std::sqrt(hyper_.variance / num_samples);
  }
}

int RandomFeatureMap::feature_dim() const {
  return kind_ == RandomFeatureKind::kRff ? 2 * num_samples() : num_samples();
}

Eigen::VectorXd RandomFeatureMap::phi(double t) const {
  const int s = num_samples();
  Eigen::VectorXd out(feature_dim());
  if (kind_ == RandomFeatureKind::kRff) {
    for (int i = 0; i < s; ++i) {
      const double arg = freq_[i] * t;
      out[2 * i] = amp_ * std::cos(arg);
      out[2 * i + 1] = amp_ * std::sin(arg);
    }
  } else {
    for (int i = 0; i < s; ++i) out[i] = amp_ * std::cos(freq_[i] * t + bias_[i]);
  }
  return out;
}

Eigen::VectorXd RandomFeatureMap::phi_prime(double t) const {
  const int s = num_samples();
  Eigen::VectorXd out(feature_dim());
  if (kind_ == RandomFeatureKind::kRff) {
    for (int i = 0; i < s; ++i) {
      const double arg = freq_[i] * t;
      out[2 * i] = -amp_ * freq_[i] * std::sin(arg);
      out[2 * i + 1] = amp_ * freq_[i] * std::cos(arg);
    }
  } else {
    for (int i = 0; i < s; ++i) out[i] = -amp_ * freq_[i] * std::sin(freq_[i] * t + bias_[i]);
  }
  return out;
}

FeatureMatrices qff_matrices(const QffFeatureMap& map, const Eigen::VectorXd& times) {
  const Eigen::Index n = times.size();
  if (n < 1) throw DomainError("qff_matrices: need at least one time point");
  FeatureMatrices fm;
  fm.phi.resize(map.feature_dim(), n);
  fm.phi_prime.resize(map.feature_dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    map.phi_into(times[j], fm.phi.col(j));
    map.phi_prime_into(times[j], fm.phi_prime.col(j));
  }
  return fm;
}

FeatureMatrices rff_matrices(const RandomFeatureMap& map, const Eigen::VectorXd& times) {
  const Eigen::Index n = times.size();
  if (n < 1) throw DomainError("rff_matrices: need at least one time point");
  FeatureMatrices fm;
  fm.phi.resize(map.feature_dim(), n);
  fm.phi_prime.resize(map.feature_dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    fm.phi.col(j) = map.phi(times[j]);
    fm.phi_prime.col(j) = map.phi_prime(times[j]);
  }
  return fm;
}

}  // namespace qffgp
