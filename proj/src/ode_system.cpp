#include "qffgp/ode_system.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "qffgp/errors.hpp"

namespace qffgp {

namespace {

OdeSystem make_lv() {
  OdeSystem s;
  s.name = "lv";
  s.state_dim = 2;
  s.param_dim = 4;
  s.true_theta = (Eigen::VectorXd(4) << 2.0, 1.0, 4.0, 1.0).finished();
  s.x0 = (Eigen::VectorXd(2) << 5.0, 3.0).finished();
  s.t_end = 2.0;
  s.rhs = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::VectorXd& dx) {
    dx[0] = th[0] * x[0] - th[1] * x[0] * x[1];
    dx[1] = -th[2] * x[1] + th[3] * x[0] * x[1];
  };
  s.jac_state = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    J(0, 0) = th[0] - th[1] * x[1];
    J(0, 1) = -th[1] * x[0];
    J(1, 0) = th[3] * x[1];
    J(1, 1) = -th[2] + th[3] * x[0];
  };
  s.jac_params = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, Eigen::MatrixXd& J) {
    J.setZero();
    J(0, 0) = x[0];
    J(0, 1) = -x[0] * x[1];
    J(1, 2) = -x[1];
    J(1, 3) = x[0] * x[1];
  };
  return s;
}

// States: S, dS, R, R_S, R_pp. The Michaelis-Menten term th4*Rpp/(th5+Rpp)
// is defined only for th5 + Rpp bounded away from zero; the admissible
// region is Rpp > -th5/2 (optimizer trial points can leave physical ranges).
OdeSystem make_pt() {
  OdeSystem s;
  s.name = "pt";
  s.state_dim = 5;
  s.param_dim = 6;
  s.true_theta = (Eigen::VectorXd(6) << 0.07, 0.6, 0.05, 0.3, 0.017, 0.3).finished();
  s.x0 = (Eigen::VectorXd(5) << 1.0, 0.0, 1.0, 0.0, 0.0).finished();
  s.t_end = 50.0;

  auto guard = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th) {
    if (!(x[4] > -0.5 * th[5])) {
      std::ostringstream msg;
      msg << "pt dynamics: R_pp = " << x[4] << " outside admissible region (needs R_pp > "
          << -0.5 * th[5] << ")";
      throw OdeDomainError(msg.str());
    }
  };
  s.rhs = [guard](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::VectorXd& dx) {
    guard(x, th);
    const double mm = th[4] * x[4] / (th[5] + x[4]);
    dx[0] = -th[0] * x[0] - th[1] * x[0] * x[2] + th[2] * x[3];
    dx[1] = th[0] * x[0];
    dx[2] = -th[1] * x[0] * x[2] + th[2] * x[3] + mm;
    dx[3] = th[1] * x[0] * x[2] - th[2] * x[3] - th[3] * x[3];
    dx[4] = th[3] * x[3] - mm;
  };
  s.jac_state = [guard](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    guard(x, th);
    const double den = th[5] + x[4];
    const double mm_d = th[4] * th[5] / (den * den);  // d/dRpp of the MM term
    J.setZero();
    J(0, 0) = -th[0] - th[1] * x[2];
    J(0, 2) = -th[1] * x[0];
    J(0, 3) = th[2];
    J(1, 0) = th[0];
    J(2, 0) = -th[1] * x[2];
    J(2, 2) = -th[1] * x[0];
    J(2, 3) = th[2];
    J(2, 4) = mm_d;
    J(3, 0) = th[1] * x[2];
    J(3, 2) = th[1] * x[0];
    J(3, 3) = -th[2] - th[3];
    J(4, 3) = th[3];
    J(4, 4) = -mm_d;
  };
  s.jac_params = [guard](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    guard(x, th);
    const double den = th[5] + x[4];
    const double mm = x[4] / den;                      // d/dth4
    const double mm_th5 = -th[4] * x[4] / (den * den);  // d/dth5
    J.setZero();
    J(0, 0) = -x[0];
    J(0, 1) = -x[0] * x[2];
    J(0, 2) = x[3];
    J(1, 0) = x[0];
    J(2, 1) = -x[0] * x[2];
    J(2, 2) = x[3];
    J(2, 4) = mm;
    J(2, 5) = mm_th5;
    J(3, 1) = x[0] * x[2];
    J(3, 2) = -x[3];
    J(3, 3) = -x[3];
    J(4, 3) = x[3];
    J(4, 4) = -mm;
    J(4, 5) = -mm_th5;
  };
  return s;
}

OdeSystem make_lorenz() {
  OdeSystem s;
  s.name = "lorenz";
  s.state_dim = 3;
  s.param_dim = 3;
  s.true_theta = (Eigen::VectorXd(3) << 10.0, 28.0, 8.0 / 3.0).finished();
  s.x0 = (Eigen::VectorXd(3) << 1.0, 1.0, 1.0).finished();
  s.t_end = 1.0;
  s.rhs = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::VectorXd& dx) {
    dx[0] = th[0] * (x[1] - x[0]);
    dx[1] = x[0] * (th[1] - x[2]) - x[1];
    dx[2] = x[0] * x[1] - th[2] * x[2];
  };
  s.jac_state = [](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    J(0, 0) = -th[0];
    J(0, 1) = th[0];
    J(0, 2) = 0.0;
    J(1, 0) = th[1] - x[2];
    J(1, 1) = -1.0;
    J(1, 2) = -x[0];
    J(2, 0) = x[1];
    J(2, 1) = x[0];
    J(2, 2) = -th[2];
  };
  s.jac_params = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, Eigen::MatrixXd& J) {
    J.setZero();
    J(0, 0) = x[1] - x[0];
    J(1, 1) = x[0];
    J(2, 2) = -x[2];
  };
  return s;
}

// 12-state 6DOF quadrocopter under fixed rotor thrusts. States: body-frame
// linear velocities (0-2), angular rates (3-5), Euler angles (6-8), world
// position (9-11). theta = [mass, Ixx, Iyy, inertia ratio, drag, arm, g].
// The Euler kinematics divide by cos(x7); the model is undefined near the
// gimbal singularity, so |cos(x7)| < 1e-6 is outside the admissible region.
OdeSystem make_quadrocopter() {
  OdeSystem s;
  s.name = "quadrocopter";
  s.state_dim = 12;
  s.param_dim = 7;
  s.true_theta =
      (Eigen::VectorXd(7) << 0.1, 0.00062, 0.00113, 0.9, 0.114, 0.0825, 9.85).finished();
  s.x0 = Eigen::VectorXd::Zero(12);
  s.t_end = 15.0;

  const double u0 = 0.248, u1 = 0.2475, u2 = 0.24775, u3 = 0.24775;
  const double du_roll = -u0 + u1 + u2 - u3;
  const double du_pitch = u0 - u1 + u3 - u2;
  const double u_sum = u0 + u1 + u2 + u3;

  auto guard = [](const Eigen::VectorXd& x) {
    if (std::abs(std::cos(x[7])) < 1e-6) {
      std::ostringstream msg;
      msg << "quadrocopter dynamics: pitch angle x7 = " << x[7]
          << " at the gimbal singularity (|cos x7| < 1e-6)";
      throw OdeDomainError(msg.str());
    }
  };

  s.rhs = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::VectorXd& dx) {
    guard(x);
    const double g = th[6];
    const double s6 = std::sin(x[6]), c6 = std::cos(x[6]);
    const double s7 = std::sin(x[7]), c7 = std::cos(x[7]);
    const double s8 = std::sin(x[8]), c8 = std::cos(x[8]);
    const double t7 = s7 / c7;
    const double q = th[3] * (th[2] + th[1]);

    dx[0] = -g * s7 + x[5] * x[1] - x[4] * x[2];
    dx[1] = g * s6 * c7 - x[0] * x[5] + x[2] * x[3];
    dx[2] = -u_sum / th[0] + g * c6 * c7 + x[0] * x[4] - th[4] * x[1];
    dx[3] = (th[5] * du_roll + (th[2] - q) * x[4] * x[5]) / th[1];
    dx[4] = (th[4] * du_pitch + (q - th[1]) * x[3] * x[5]) / th[2];
    dx[5] = (th[1] - th[2]) * x[3] * x[4] / q;
    dx[6] = x[3] + (x[4] * s6 + x[5] * c6) * t7;
    dx[7] = x[4] * c6 - x[5] * s6;
    dx[8] = (x[4] * s6 + x[5] * c6) / c7;
    dx[9] = c7 * c8 * x[0] + (-c6 * s8 + s6 * s7 * c8) * x[1] + (s6 * s8 + c6 * s7 * c8) * x[2];
    dx[10] = c7 * s8 * x[0] + (c6 * c8 + s6 * s7 * s8) * x[1] + (c6 * s7 * s8 - s6 * c8) * x[2];
    dx[11] = s7 * x[0] - s6 * c7 * x[1] - c6 * c7 * x[2];
  };

  s.jac_state = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    guard(x);
    const double g = th[6];
    const double s6 = std::sin(x[6]), c6 = std::cos(x[6]);
    const double s7 = std::sin(x[7]), c7 = std::cos(x[7]);
    const double s8 = std::sin(x[8]), c8 = std::cos(x[8]);
    const double t7 = s7 / c7;
    const double q = th[3] * (th[2] + th[1]);
    J.setZero();

    J(0, 1) = x[5];
    J(0, 2) = -x[4];
    J(0, 4) = -x[2];
    J(0, 5) = x[1];
    J(0, 7) = -g * c7;

    J(1, 0) = -x[5];
    J(1, 2) = x[3];
    J(1, 3) = x[2];
    J(1, 5) = -x[0];
    J(1, 6) = g * c6 * c7;
    J(1, 7) = -g * s6 * s7;

    J(2, 0) = x[4];
    J(2, 1) = -th[4];
    J(2, 4) = x[0];
    J(2, 6) = -g * s6 * c7;
    J(2, 7) = -g * c6 * s7;

    J(3, 4) = (th[2] - q) * x[5] / th[1];
    J(3, 5) = (th[2] - q) * x[4] / th[1];

    J(4, 3) = (q - th[1]) * x[5] / th[2];
    J(4, 5) = (q - th[1]) * x[3] / th[2];

    J(5, 3) = (th[1] - th[2]) * x[4] / q;
    J(5, 4) = (th[1] - th[2]) * x[3] / q;

    J(6, 3) = 1.0;
    J(6, 4) = s6 * t7;
    J(6, 5) = c6 * t7;
    J(6, 6) = (x[4] * c6 - x[5] * s6) * t7;
    J(6, 7) = (x[4] * s6 + x[5] * c6) / (c7 * c7);

    J(7, 4) = c6;
    J(7, 5) = -s6;
    J(7, 6) = -x[4] * s6 - x[5] * c6;

    J(8, 4) = s6 / c7;
    J(8, 5) = c6 / c7;
    J(8, 6) = (x[4] * c6 - x[5] * s6) / c7;
    J(8, 7) = (x[4] * s6 + x[5] * c6) * s7 / (c7 * c7);

    J(9, 0) = c7 * c8;
    J(9, 1) = -c6 * s8 + s6 * s7 * c8;
    J(9, 2) = s6 * s8 + c6 * s7 * c8;
    J(9, 6) = (s6 * s8 + c6 * s7 * c8) * x[1] + (c6 * s8 - s6 * s7 * c8) * x[2];
    J(9, 7) = -s7 * c8 * x[0] + s6 * c7 * c8 * x[1] + c6 * c7 * c8 * x[2];
    J(9, 8) = -c7 * s8 * x[0] + (-c6 * c8 - s6 * s7 * s8) * x[1] + (s6 * c8 - c6 * s7 * s8) * x[2];

    J(10, 0) = c7 * s8;
    J(10, 1) = c6 * c8 + s6 * s7 * s8;
    J(10, 2) = c6 * s7 * s8 - s6 * c8;
    J(10, 6) = (-s6 * c8 + c6 * s7 * s8) * x[1] + (-s6 * s7 * s8 - c6 * c8) * x[2];
    J(10, 7) = -s7 * s8 * x[0] + s6 * c7 * s8 * x[1] + c6 * c7 * s8 * x[2];
    J(10, 8) = c7 * c8 * x[0] + (-c6 * s8 + s6 * s7 * c8) * x[1] + (c6 * s7 * c8 + s6 * s8) * x[2];

    J(11, 0) = s7;
    J(11, 1) = -s6 * c7;
    J(11, 2) = -c6 * c7;
    J(11, 6) = -c6 * c7 * x[1] + s6 * c7 * x[2];
    J(11, 7) = c7 * x[0] + s6 * s7 * x[1] + c6 * s7 * x[2];
  };

  s.jac_params = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
    guard(x);
    const double s6 = std::sin(x[6]), c6 = std::cos(x[6]);
    const double s7 = std::sin(x[7]), c7 = std::cos(x[7]);
    const double q = th[3] * (th[2] + th[1]);
    J.setZero();

    J(0, 6) = -s7;
    J(1, 6) = s6 * c7;

    J(2, 0) = u_sum / (th[0] * th[0]);
    J(2, 4) = -x[1];
    J(2, 6) = c6 * c7;

    const double s3 = th[5] * du_roll + (th[2] - q) * x[4] * x[5];
    J(3, 1) = -s3 / (th[1] * th[1]) - th[3] * x[4] * x[5] / th[1];
    J(3, 2) = (1.0 - th[3]) * x[4] * x[5] / th[1];
    J(3, 3) = -(th[2] + th[1]) * x[4] * x[5] / th[1];
    J(3, 5) = du_roll / th[1];

    const double s4 = th[4] * du_pitch + (q - th[1]) * x[3] * x[5];
    J(4, 1) = (th[3] - 1.0) * x[3] * x[5] / th[2];
    J(4, 2) = -s4 / (th[2] * th[2]) + th[3] * x[3] * x[5] / th[2];
    J(4, 3) = (th[2] + th[1]) * x[3] * x[5] / th[2];
    J(4, 4) = du_pitch / th[2];

    J(5, 1) = x[3] * x[4] * (q - (th[1] - th[2]) * th[3]) / (q * q);
    J(5, 2) = x[3] * x[4] * (-q - (th[1] - th[2]) * th[3]) / (q * q);
    J(5, 3) = -(th[1] - th[2]) * x[3] * x[4] * (th[2] + th[1]) / (q * q);
  };
  return s;
}

}  // namespace

const OdeSystem& lookup_system(const std::string& name) {
  static const std::map<std::string, OdeSystem> registry = [] {
    std::map<std::string, OdeSystem> m;
    m.emplace("lv", make_lv());
    m.emplace("pt", make_pt());
    m.emplace("lorenz", make_lorenz());
    m.emplace("quadrocopter", make_quadrocopter());
    return m;
  }();
  auto it = registry.find(name);
  if (it == registry.end()) {
    throw DomainError("lookup_system: unknown system '" + name +
                      "' (known: lv, pt, lorenz, quadrocopter)");
  }
  return it->second;
}

std::vector<std::string> system_names() { return {"lv", "pt", "lorenz", "quadrocopter"}; }

}  // namespace qffgp
