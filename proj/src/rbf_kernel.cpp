#include "qffgp/rbf_kernel.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

#include "qffgp/errors.hpp"

namespace qffgp {

void RbfHyperparams::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw DomainError("RbfHyperparams: variance must be positive");
  }
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw DomainError("RbfHyperparams: lengthscale must be positive");
  }
}

double kernel_eval(const RbfHyperparams& h, double r) {
  const double l2 = h.lengthscale * h.lengthscale;
  return h.variance * std::exp(-0.5 * r * r / l2);
}

double kernel_d1(const RbfHyperparams& h, double r) {
  const double l2 = h.lengthscale * h.lengthscale;
  return -h.variance * (r / l2) * std::exp(-0.5 * r * r / l2);
}

double kernel_d2(const RbfHyperparams& h, double r) {
  const double l2 = h.lengthscale * h.lengthscale;
  return h.variance * (1.0 / l2 - r * r / (l2 * l2)) * std::exp(-0.5 * r * r / l2);
}

KernelMatrices gram_matrices(const RbfHyperparams& h, const Eigen::VectorXd& times) {
  h.validate();
  const Eigen::Index n = times.size();
  if (n < 1) throw DomainError("gram_matrices: need at least one time point");

  KernelMatrices km;
  km.C.resize(n, n);
  km.Cp.resize(n, n);
  km.pC.resize(n, n);
  km.Cpp.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = times[i] - times[j];
      km.C(i, j) = kernel_eval(h, r);
      km.pC(i, j) = kernel_d1(h, r);
      km.Cp(i, j) = -km.pC(i, j);
      km.Cpp(i, j) = kernel_d2(h, r);
    }
  }
  return km;
}

GpDerivModelMatrices model_matrices(const KernelMatrices& km, double jitter) {
  if (!(jitter > 0.0)) throw DomainError("model_matrices: jitter must be positive");
  const Eigen::Index n = km.C.rows();

  Eigen::MatrixXd Cj = km.C;
  Cj.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(Cj);
  if (llt.info() != Eigen::Success) {
    // LLT gives no pivot; LDLT's smallest diagonal is the usable diagnostic.
    const double min_pivot = Cj.ldlt().vectorD().minCoeff();
    std::ostringstream msg;
    msg << "model_matrices: C + jitter*I failed Cholesky (jitter = " << jitter
        << ", smallest pivot = " << min_pivot << ")";
    throw LinAlgError(msg.str());
  }

  GpDerivModelMatrices mm;
  mm.jitter = jitter;
  // D = pC (C + jitter I)^{-1}; solve on the transpose, pC^T = Cp.
  mm.D = llt.solve(km.Cp).transpose();
  mm.A = km.Cpp - km.pC * llt.solve(km.Cp);
  mm.A = 0.5 * (mm.A + mm.A.transpose()).eval();
  (void)n;
  return mm;
}

}  // namespace qffgp
