#include "qffgp/hyperfit.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qffgp/errors.hpp"
#include "qffgp/features.hpp"

namespace qffgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Minimal Nelder-Mead simplex over R^3; returns best point found.
struct SimplexResult {
  Eigen::Vector3d x;
  double f = kInf;
};

SimplexResult nelder_mead(const std::function<double(const Eigen::Vector3d&)>& fn,
                          const Eigen::Vector3d& start, double spread, int max_iters) {
  constexpr int kDim = 3;
  std::array<Eigen::Vector3d, kDim + 1> pts;
  std::array<double, kDim + 1> fv;
  pts[0] = start;
  fv[0] = fn(start);
  for (int i = 0; i < kDim; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += spread;
    fv[i + 1] = fn(pts[i + 1]);
  }

  auto order = [&] {
    std::array<int, kDim + 1> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::array<Eigen::Vector3d, kDim + 1> p2;
    std::array<double, kDim + 1> f2;
    for (int i = 0; i <= kDim; ++i) {
      p2[i] = pts[idx[i]];
      f2[i] = fv[idx[i]];
    }
    pts = p2;
    fv = f2;
  };

  for (int it = 0; it < max_iters; ++it) {
    order();
    if (std::isfinite(fv[0]) && fv[kDim] - fv[0] <= 1e-10 * (1.0 + std::abs(fv[0]))) break;

    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i = 0; i < kDim; ++i) centroid += pts[i];
    centroid /= kDim;

    const Eigen::Vector3d refl = centroid + (centroid - pts[kDim]);
    const double f_refl = fn(refl);
    if (f_refl < fv[0]) {
      const Eigen::Vector3d exp_pt = centroid + 2.0 * (centroid - pts[kDim]);
      const double f_exp = fn(exp_pt);
      if (f_exp < f_refl) {
        pts[kDim] = exp_pt;
        fv[kDim] = f_exp;
      } else {
        pts[kDim] = refl;
        fv[kDim] = f_refl;
      }
    } else if (f_refl < fv[kDim - 1]) {
      pts[kDim] = refl;
      fv[kDim] = f_refl;
    } else {
      const Eigen::Vector3d contr = centroid + 0.5 * (pts[kDim] - centroid);
      const double f_contr = fn(contr);
      if (f_contr < fv[kDim]) {
        pts[kDim] = contr;
        fv[kDim] = f_contr;
      } else {
        for (int i = 1; i <= kDim; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          fv[i] = fn(pts[i]);
        }
      }
    }
  }
  order();
  return {pts[0], fv[0]};
}

}  // namespace

double nll_dense(const Eigen::VectorXd& y, const Eigen::VectorXd& times_unit,
                 const RbfHyperparams& h, double sigma2) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd K(n, n);
  const double l2 = h.lengthscale * h.lengthscale;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double r = times_unit[i] - times_unit[j];
      K(i, j) = h.variance * std::exp(-0.5 * r * r / l2);
      K(j, i) = K(i, j);
    }
  }
  K.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) return kInf;
  const double quad = y.dot(llt.solve(y));
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (quad + logdet + n * kLog2Pi);
}

double nll_features(const Eigen::VectorXd& y, const Eigen::VectorXd& times_unit,
                    const RbfHyperparams& h, double sigma2, int order) {
  const Eigen::Index n = y.size();
  const QffFeatureMap map(h, order);
  const int M = map.feature_dim();
  Eigen::MatrixXd phi(M, n);
  for (Eigen::Index j = 0; j < n; ++j) map.phi_into(times_unit[j], phi.col(j));

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(M, M);
  B.selfadjointView<Eigen::Lower>().rankUpdate(phi, 1.0);
  B = B.selfadjointView<Eigen::Lower>();
  B.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) return kInf;

  const Eigen::VectorXd py = phi * y;
  const double quad = (y.squaredNorm() - py.dot(llt.solve(py))) / sigma2;
  // det(C~ + s2 I_N) = s2^{N-2m} det(Phi Phi^T + s2 I_{2m})
  const double logdet = (static_cast<double>(n) - M) * std::log(sigma2) +
                        2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * (quad + logdet + n * kLog2Pi);
}

FittedHyper fit_hyperparams(const Eigen::VectorXd& y, const Eigen::VectorXd& times_unit,
                            const FitOptions& options) {
  const Eigen::Index n = y.size();
  if (n < 3) throw DomainError("fit_hyperparams: need at least 3 observations");
  if (times_unit.size() != n) throw DomainError("fit_hyperparams: size mismatch");

  Eigen::VectorXd yf = y;
  Eigen::VectorXd tf = times_unit;
  if (!options.use_features && n > options.max_points) {
    // Preprocessing estimate only; an even subsample keeps the dense path
    // tractable without moving the optimum materially.
    Eigen::VectorXd idx = Eigen::VectorXd::LinSpaced(options.max_points, 0, static_cast<double>(n - 1));
    yf.resize(options.max_points);
    tf.resize(options.max_points);
    for (int i = 0; i < options.max_points; ++i) {
      const auto j = static_cast<Eigen::Index>(std::llround(idx[i]));
      yf[i] = y[j];
      tf[i] = times_unit[j];
    }
  }

  const Eigen::Vector3d lo(std::log(options.rho_min), std::log(options.l_min),
                           std::log(options.sigma2_min));
  const Eigen::Vector3d hi(std::log(options.rho_max), std::log(options.l_max),
                           std::log(options.sigma2_max));

  auto clamp3 = [&](const Eigen::Vector3d& v) {
    return v.cwiseMax(lo).cwiseMin(hi);
  };
  auto objective = [&](const Eigen::Vector3d& v) -> double {
    const Eigen::Vector3d c = clamp3(v);
    const double penalty = 1e2 * (v - c).squaredNorm();
    RbfHyperparams h{std::exp(c[0]), std::exp(c[1])};
    const double sigma2 = std::exp(c[2]);
    const double nll = options.use_features
                           ? nll_features(yf, tf, h, sigma2, options.feature_order)
                           : nll_dense(yf, tf, h, sigma2);
    return nll + penalty;
  };

  const double var_y = (yf.array() - yf.mean()).square().sum() / std::max<Eigen::Index>(1, yf.size());
  const double rho0 = std::max(var_y, 1e-8);
  const double sig0 = std::max(0.05 * var_y, 10.0 * options.sigma2_min);

  SimplexResult best;
  std::ostringstream trace;
  bool any_finite = false;
  for (double l0 : {0.05, 0.1, 0.2, 0.4}) {
    const double l_start = std::clamp(l0, options.l_min * 1.5, options.l_max / 1.5);
    Eigen::Vector3d start(std::log(rho0), std::log(l_start), std::log(sig0));
    SimplexResult r = nelder_mead(objective, start, 0.4, options.nm_max_iters);
    trace << " start(l0=" << l0 << ") -> " << r.f;
    if (std::isfinite(r.f)) {
      any_finite = true;
      if (r.f < best.f) best = r;
    }
  }
  if (!any_finite) {
    throw FitError("fit_hyperparams: every start diverged; objective trace:" + trace.str());
  }

  const Eigen::Vector3d c = clamp3(best.x);
  FittedHyper out;
  out.hyper = RbfHyperparams{std::exp(c[0]), std::exp(c[1])};
  out.sigma2 = std::exp(c[2]);
  out.objective = best.f;
  return out;
}

std::vector<FittedHyper> fit_hyperparams_all(const Eigen::MatrixXd& y,
                                             const Eigen::VectorXd& times_unit,
                                             const FitOptions& options) {
  std::vector<FittedHyper> out;
  out.reserve(y.cols());
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    out.push_back(fit_hyperparams(y.col(k), times_unit, options));
  }
  return out;
}

}  // namespace qffgp
