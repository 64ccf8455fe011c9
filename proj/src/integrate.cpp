#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>
#include <vector>

#include "qffgp/dataset.hpp"
#include "qffgp/errors.hpp"

namespace qffgp {

namespace {
using State = std::vector<double>;
constexpr long kMaxSteps = 4000000;
}  // namespace

Eigen::MatrixXd integrate(const OdeSystem& sys, const Eigen::VectorXd& theta,
                          const Eigen::VectorXd& x0, const Eigen::VectorXd& times,
                          double abs_tol, double rel_tol) {
  namespace odeint = boost::numeric::odeint;
  const int K = sys.state_dim;
  if (x0.size() != K) throw DomainError("integrate: x0 dimension mismatch");
  if (theta.size() != sys.param_dim) throw DomainError("integrate: theta dimension mismatch");
  const Eigen::Index n = times.size();
  if (n < 1) throw DomainError("integrate: empty time grid");
  if (!theta.allFinite() || !x0.allFinite()) {
    throw DomainError("integrate: non-finite theta or x0");
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(times[i] >= times[i - 1])) throw DomainError("integrate: times must be ascending");
  }

  Eigen::VectorXd xe(K), dxe(K);
  auto rhs = [&](const State& x, State& dxdt, double /*t*/) {
    for (int k = 0; k < K; ++k) xe[k] = x[k];
    sys.rhs(xe, theta, dxe);
    for (int k = 0; k < K; ++k) dxdt[k] = dxe[k];
  };

  Eigen::MatrixXd out(n, K);
  const double t0 = times[0] < 0.0 ? times[0] : 0.0;
  const double t_last = times[n - 1];
  const double span = std::max(t_last - t0, 1e-12);

  auto stepper =
      odeint::make_dense_output(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
  State x(x0.data(), x0.data() + K);
  stepper.initialize(x, t0, span / 1000.0);

  Eigen::Index next = 0;
  // Sample requests that coincide with the start.
  while (next < n && times[next] <= t0) {
    for (int k = 0; k < K; ++k) out(next, k) = x0[k];
    ++next;
  }

  long steps = 0;
  double t_now = t0;
  try {
    while (next < n) {
      stepper.do_step(rhs);
      t_now = stepper.current_time();
      const State& cur = stepper.current_state();
      for (int k = 0; k < K; ++k) {
        if (!std::isfinite(cur[k])) {
          std::ostringstream msg;
          msg << "integrate(" << sys.name << "): state became non-finite near t = " << t_now;
          throw IntegrationError(t_now, msg.str());
        }
      }
      if (++steps > kMaxSteps) {
        std::ostringstream msg;
        msg << "integrate(" << sys.name << "): step budget exhausted near t = " << t_now;
        throw IntegrationError(t_now, msg.str());
      }
      State sample(K);
      while (next < n && times[next] <= t_now) {
        stepper.calc_state(times[next], sample);
        for (int k = 0; k < K; ++k) out(next, k) = sample[k];
        ++next;
      }
    }
  } catch (const IntegrationError&) {
    throw;
  } catch (const OdeDomainError& e) {
    throw IntegrationError(t_now, std::string("integrate(") + sys.name + "): " + e.what());
  } catch (const std::exception& e) {
    // odeint throws std::runtime_error when the controlled step size collapses.
    std::ostringstream msg;
    msg << "integrate(" << sys.name << "): stepper failed near t = " << t_now << " (" << e.what()
        << ")";
    throw IntegrationError(t_now, msg.str());
  }
  return out;
}

}  // namespace qffgp
