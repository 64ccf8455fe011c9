#ifndef QFFGP_QUADRATURE_HPP
#define QFFGP_QUADRATURE_HPP

#include <Eigen/Core>
#include <functional>
#include <memory>

namespace qffgp {

/// Gauss-Hermite rule of order m for the weight e^{-w^2}: integrates every
/// polynomial of degree <= 2m-1 exactly against int e^{-w^2} f(w) dw.
///
/// Invariants enforced at construction: nodes strictly increasing and
/// symmetric about 0, weights strictly positive, sum of weights = sqrt(pi)
/// to 1e-12 relative. Immutable after construction; safe to share.
struct QuadratureRule {
  int order = 0;
  Eigen::VectorXd nodes;    // ascending abscissas
  Eigen::VectorXd weights;  // positive weights
};

/// Builds the order-m rule. Nodes are Newton-polished roots of the Hermite
/// polynomial (orthonormal three-term recurrence, asymptotic initial guesses,
/// tolerance 1e-14 on the Newton step, 100 iterations). Orders up to 512 are
/// supported; beyond that construction either converges or throws
/// RuleConstructionError -- it never returns an unvalidated rule.
QuadratureRule gauss_hermite_rule(int m);

/// Process-wide rule registry keyed by order; safe for concurrent lookup.
std::shared_ptr<const QuadratureRule> cached_rule(int m);

/// Sum_i W_i f(w_i). Throws NumericError naming the node if f is non-finite.
double quadrature_apply(const QuadratureRule& rule, const std::function<double(double)>& f);

}  // namespace qffgp

#endif  // QFFGP_QUADRATURE_HPP
