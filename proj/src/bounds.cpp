#include "qffgp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qffgp/errors.hpp"

namespace qffgp {

namespace {

constexpr double kE = 2.7182818284590452353602874713527;
constexpr double kLn2 = 0.69314718055994530941723212145818;
constexpr double kHalfLnPi = 0.57236494292470008707171367567653;  // ln(sqrt(pi))

void require_positive(double v, const char* name, const char* fn) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(fn) + ": argument " + name + " must be positive and finite");
  }
}

}  // namespace

double log_e_m(int m, double lengthscale) {
  if (m < 1) throw DomainError("log_e_m: order must be >= 1, got " + std::to_string(m));
  require_positive(lengthscale, "lengthscale", "log_e_m");
  const double md = static_cast<double>(m);
  // ln E_m = ln sqrt(pi) + m * (1 - ln(4 l^2) - ln m)
  return kHalfLnPi + md * (1.0 - std::log(4.0 * lengthscale * lengthscale) - std::log(md));
}

double e_m(int m, double lengthscale) { return std::exp(log_e_m(m, lengthscale)); }

ErrorBudget theorem2_budget(int m, double lengthscale) {
  if (m < 4) {
    throw DomainError("theorem2_budget: requires m >= 4 so E_{m-3} is defined, got m = " +
                      std::to_string(m));
  }
  const double l2 = lengthscale * lengthscale;
  ErrorBudget b;
  b.em = e_m(m, lengthscale);
  b.d1_bound = std::exp(std::log(2.0 * kE / l2) + log_e_m(m - 2, lengthscale));
  b.d2_bound = std::exp(std::log(2.0 * kE / (l2 * l2)) + log_e_m(m - 3, lengthscale));
  return b;
}

double d1_bound_tight(int m, double lengthscale) {
  if (m < 2) throw DomainError("d1_bound_tight: requires m >= 2");
  return std::exp(std::log(8.0 * (m - 1)) + log_e_m(m - 1, lengthscale));
}

double d2_bound_tight(int m, double lengthscale) {
  if (m < 3) throw DomainError("d2_bound_tight: requires m >= 3");
  const double l2 = lengthscale * lengthscale;
  return std::exp(std::log(4.0 * (m - 1) / l2) + log_e_m(m - 2, lengthscale));
}

int min_order_gprd(double lengthscale, double rho, int n, double c, double R, double tol) {
  require_positive(lengthscale, "lengthscale", "min_order_gprd");
  require_positive(rho, "rho", "min_order_gprd");
  require_positive(c, "c", "min_order_gprd");
  require_positive(R, "R", "min_order_gprd");
  require_positive(tol, "tol", "min_order_gprd");
  if (n < 1) throw DomainError("min_order_gprd: n must be >= 1");
  if (tol >= 1.0) throw DomainError("min_order_gprd: tol must satisfy 0 < tol < 1");

  // Out-of-range parameters are replaced by 1; the bound stays valid.
  const double l = std::min(lengthscale, 1.0);
  rho = std::max(rho, 1.0);
  c = std::min(c, 1.0);
  R = std::max(R, 1.0);

  const double branch_l = kE / (2.0 * l * l);
  const double log2_arg = (std::log(270.0) + 2.0 * std::log(static_cast<double>(n)) +
                           3.0 * std::log(rho) + std::log(R) - 8.0 * std::log(l) -
                           2.0 * std::log(c) - std::log(tol)) /
                          kLn2;
  return static_cast<int>(std::ceil(3.0 + std::max(branch_l, log2_arg)));
}

int min_order_risk(double lengthscale, double rho, double lambda, double gamma, int n,
                   double eps) {
  require_positive(lengthscale, "lengthscale", "min_order_risk");
  require_positive(rho, "rho", "min_order_risk");
  require_positive(lambda, "lambda", "min_order_risk");
  require_positive(gamma, "gamma", "min_order_risk");
  if (n < 60) {
    throw DomainError("min_order_risk: the bound requires n >= 60, got n = " + std::to_string(n));
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError("min_order_risk: the bound requires 0 < eps < 1");
  }

  const double l = std::min(lengthscale, 1.0);
  rho = std::max(rho, 1.0);
  lambda = std::min(lambda, 1.0);
  gamma = std::min(gamma, 1.0);

  const double branch_l = kE / (2.0 * l * l);
  const double log2_arg = (2.0 * std::log(rho) + 3.0 * std::log(static_cast<double>(n)) -
                           2.0 * std::log(lambda) - std::log(gamma) - 4.0 * std::log(l) -
                           std::log(eps)) /
                          kLn2;
  return static_cast<int>(std::ceil(10.0 + std::max(branch_l, log2_arg)));
}

}  // namespace qffgp
