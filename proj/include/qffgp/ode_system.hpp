#ifndef QFFGP_ODE_SYSTEM_HPP
#define QFFGP_ODE_SYSTEM_HPP

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace qffgp {

/// Parametric dynamics x' = f(x, theta) with reference parameters and
/// initial conditions. Systems are stateless descriptions; all callables are
/// pure and safe to invoke concurrently. Right-hand sides throw
/// OdeDomainError outside their admissible region.
struct OdeSystem {
  std::string name;
  int state_dim = 0;
  int param_dim = 0;
  Eigen::VectorXd true_theta;
  Eigen::VectorXd x0;
  double t_end = 0.0;

  /// dx = f(x, theta)
  std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                     Eigen::VectorXd& dx)>
      rhs;
  /// J(i,j) = df_i/dx_j
  std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                     Eigen::MatrixXd& J)>
      jac_state;
  /// J(i,p) = df_i/dtheta_p
  std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                     Eigen::MatrixXd& J)>
      jac_params;

  Eigen::VectorXd eval(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const {
    Eigen::VectorXd dx(state_dim);
    rhs(x, theta, dx);
    return dx;
  }
};

/// Benchmark registry: "lv" (predator-prey, [0,2]), "pt" (protein signalling
/// chain, [0,50]), "lorenz" (chaotic convection flow, [0,1]), "quadrocopter"
/// (12-state rigid body with fixed rotor inputs, [0,15]).
/// Throws DomainError for unknown names.
const OdeSystem& lookup_system(const std::string& name);
std::vector<std::string> system_names();

}  // namespace qffgp

#endif  // QFFGP_ODE_SYSTEM_HPP
