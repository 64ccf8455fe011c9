#ifndef QFFGP_BOUNDS_HPP
#define QFFGP_BOUNDS_HPP

namespace qffgp {

/// Master error term E_m = sqrt(pi) * (e / (4 l^2 m))^m controlling the
/// kernel-approximation error of an order-m quadrature feature expansion,
/// together with the derivative bounds that follow from it.
struct ErrorBudget {
  double em = 0.0;        // |k - k~|       <= em
  double d1_bound = 0.0;  // |k' - k~'|     <= (2e/l^2)  * E_{m-2}
  double d2_bound = 0.0;  // |k'' - k~''|   <= (2e/l^4)  * E_{m-3}
};

/// Natural log of E_m; exact in log-space for any m >= 1.
double log_e_m(int m, double lengthscale);

/// E_m itself. Underflow saturates to 0 and overflow to +inf by design:
/// the value is a bound, so saturation keeps comparisons meaningful.
double e_m(int m, double lengthscale);

/// The three bounds for an order-m scheme. Requires m >= 4 (so E_{m-3} is
/// defined); smaller m throws DomainError rather than clamping, so soundness
/// sweeps cannot silently weaken.
ErrorBudget theorem2_budget(int m, double lengthscale);

/// Tighter intermediate forms of the derivative bounds:
/// first derivative 8(m-1)E_{m-1} (m >= 2), mixed (4/l^2)(m-1)E_{m-2} (m >= 3).
double d1_bound_tight(int m, double lengthscale);
double d2_bound_tight(int m, double lengthscale);

/// Minimum quadrature order guaranteeing every posterior error (state and
/// derivative mean/variance) stays below tol on the unit interval:
/// ceil(3 + max(e/2l^2, log2(270 n^2 rho^3 R / (l^8 c^2 tol)))) with the
/// out-of-range substitutions R<1, c>1, rho<1, l>1 -> 1 applied first.
/// Requires every argument positive and tol < 1.
int min_order_gprd(double lengthscale, double rho, int n, double c, double R, double tol);

/// Minimum quadrature order guaranteeing relative risk-approximation error
/// <= eps for every (x, theta):
/// ceil(10 + max(e/2l^2, log2(rho^2 n^3 / (lambda^2 gamma l^4 eps)))) with
/// the substitutions gamma>1, lambda>1 -> 1, rho<1 -> 1, l>1 -> 1.
/// Requires n >= 60 and 0 < eps < 1.
int min_order_risk(double lengthscale, double rho, double lambda, double gamma, int n, double eps);

}  // namespace qffgp

#endif  // QFFGP_BOUNDS_HPP
