#ifndef QFFGP_RBF_KERNEL_HPP
#define QFFGP_RBF_KERNEL_HPP

#include <Eigen/Core>

namespace qffgp {

/// RBF kernel hyperparameters: k(r) = variance * exp(-r^2 / (2 lengthscale^2)).
struct RbfHyperparams {
  double variance = 1.0;     // rho, units of state^2
  double lengthscale = 1.0;  // l, same units as time

  void validate() const;
};

/// Gram matrices of the kernel and its derivatives on a time grid.
/// Convention (first/second argument derivatives):
///   C   [i,j] = k(t_i, t_j)
///   pC  [i,j] = d/da k(a,b)   at (t_i, t_j)   ("prime-C")
///   Cp  [i,j] = d/db k(a,b)   at (t_i, t_j)   ("C-prime")
///   Cpp [i,j] = d^2/(da db) k at (t_i, t_j)
/// For the RBF kernel pC = Cp^T = -Cp elementwise.
struct KernelMatrices {
  Eigen::MatrixXd C;
  Eigen::MatrixXd Cp;
  Eigen::MatrixXd pC;
  Eigen::MatrixXd Cpp;
};

/// Conditional-Gaussian matrices of the derivative model:
///   D = pC (C + jitter I)^{-1},   A = Cpp - pC (C + jitter I)^{-1} Cp,
/// with A symmetrized after assembly. A + g I is positive definite for g > 0.
struct GpDerivModelMatrices {
  Eigen::MatrixXd D;
  Eigen::MatrixXd A;
  double jitter = 0.0;
};

double kernel_eval(const RbfHyperparams& h, double r);
/// d/da k(a,b) at r = a - b; the second-argument derivative is its negation.
double kernel_d1(const RbfHyperparams& h, double r);
/// d^2/(da db) k(a,b) at r = a - b.
double kernel_d2(const RbfHyperparams& h, double r);

KernelMatrices gram_matrices(const RbfHyperparams& h, const Eigen::VectorXd& times);

/// Throws LinAlgError (with the jitter and smallest pivot) if C + jitter I
/// fails to factor. No explicit inverses are formed; D and A come from solves.
GpDerivModelMatrices model_matrices(const KernelMatrices& km, double jitter);

/// Default jitter scale: jitter = 1e-6 * variance keeps C + jitter I well
/// conditioned on dense unit-interval grids without visibly biasing results.
inline double default_jitter(const RbfHyperparams& h) { return 1e-6 * h.variance; }

}  // namespace qffgp

#endif  // QFFGP_RBF_KERNEL_HPP
