#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "qffgp/bounds.hpp"
#include "qffgp/dataset.hpp"
#include "qffgp/errors.hpp"
#include "qffgp/features.hpp"
#include "qffgp/gp_deriv.hpp"
#include "qffgp/hyperfit.hpp"
#include "qffgp/ode_system.hpp"
#include "qffgp/optimize.hpp"
#include "qffgp/quadrature.hpp"
#include "qffgp/rbf_kernel.hpp"
#include "qffgp/risk.hpp"

namespace py = pybind11;
using namespace qffgp;

namespace {

OdinProblem make_problem_py(const std::string& system, const Dataset& data,
                            const std::vector<RbfHyperparams>& hyper,
                            const Eigen::VectorXd& sigma2, bool learn_gamma) {
  return make_problem(lookup_system(system), data, hyper, sigma2, learn_gamma);
}

std::shared_ptr<RiskEvaluator> make_risk_evaluator(const OdinProblem& p, int order) {
  auto shared = std::make_shared<const OdinProblem>(p);
  if (order <= 0) return std::make_shared<ExactRiskEvaluator>(shared);
  return std::make_shared<FeatureRiskEvaluator>(shared, problem_feature_maps(p, order));
}

}  // namespace

PYBIND11_MODULE(qffgp, m) {
  m.doc() = "Quadrature Fourier feature GP regression with derivatives and ODE parameter "
            "inference";

  py::register_exception<Error>(m, "QffgpError");

  // --- quadrature ---------------------------------------------------------
  py::class_<QuadratureRule>(m, "QuadratureRule")
      .def_readonly("order", &QuadratureRule::order)
      .def_readonly("nodes", &QuadratureRule::nodes)
      .def_readonly("weights", &QuadratureRule::weights);
  m.def("gauss_hermite_rule", &gauss_hermite_rule, py::arg("order"));
  m.def("quadrature_apply", &quadrature_apply, py::arg("rule"), py::arg("f"));

  // --- kernel --------------------------------------------------------------
  py::class_<RbfHyperparams>(m, "RbfHyperparams")
      .def(py::init<double, double>(), py::arg("variance"), py::arg("lengthscale"))
      .def_readwrite("variance", &RbfHyperparams::variance)
      .def_readwrite("lengthscale", &RbfHyperparams::lengthscale)
      .def("__repr__", [](const RbfHyperparams& h) {
        std::ostringstream os;
        os << "RbfHyperparams(variance=" << h.variance << ", lengthscale=" << h.lengthscale
           << ")";
        return os.str();
      });
  m.def("kernel_eval", &kernel_eval, py::arg("hyper"), py::arg("r"));
  m.def("kernel_d1", &kernel_d1, py::arg("hyper"), py::arg("r"));
  m.def("kernel_d2", &kernel_d2, py::arg("hyper"), py::arg("r"));
  py::class_<KernelMatrices>(m, "KernelMatrices")
      .def_readonly("C", &KernelMatrices::C)
      .def_readonly("Cp", &KernelMatrices::Cp)
      .def_readonly("pC", &KernelMatrices::pC)
      .def_readonly("Cpp", &KernelMatrices::Cpp);
  m.def("gram_matrices", &gram_matrices, py::arg("hyper"), py::arg("times"));
  py::class_<GpDerivModelMatrices>(m, "GpDerivModelMatrices")
      .def_readonly("D", &GpDerivModelMatrices::D)
      .def_readonly("A", &GpDerivModelMatrices::A)
      .def_readonly("jitter", &GpDerivModelMatrices::jitter);
  m.def("model_matrices", &model_matrices, py::arg("kernel_matrices"), py::arg("jitter"));

  // --- features -------------------------------------------------------------
  py::class_<QffFeatureMap>(m, "QffFeatureMap")
      .def(py::init<const RbfHyperparams&, int>(), py::arg("hyper"), py::arg("order"))
      .def_property_readonly("order", &QffFeatureMap::order)
      .def_property_readonly("feature_dim", &QffFeatureMap::feature_dim)
      .def("phi", &QffFeatureMap::phi, py::arg("t"))
      .def("phi_prime", &QffFeatureMap::phi_prime, py::arg("t"));
  py::enum_<RandomFeatureKind>(m, "RandomFeatureKind")
      .value("RFF", RandomFeatureKind::kRff)
      .value("RFF_B", RandomFeatureKind::kRffBias);
  py::class_<RandomFeatureMap>(m, "RandomFeatureMap")
      .def(py::init<RandomFeatureKind, const RbfHyperparams&, int, std::uint64_t>(),
           py::arg("kind"), py::arg("hyper"), py::arg("num_samples"), py::arg("seed"))
      .def_property_readonly("feature_dim", &RandomFeatureMap::feature_dim)
      .def_property_readonly("frequencies", &RandomFeatureMap::frequencies)
      .def("phi", &RandomFeatureMap::phi, py::arg("t"))
      .def("phi_prime", &RandomFeatureMap::phi_prime, py::arg("t"));
  py::class_<FeatureMatrices>(m, "FeatureMatrices")
      .def_readonly("phi", &FeatureMatrices::phi)
      .def_readonly("phi_prime", &FeatureMatrices::phi_prime);
  m.def("qff_matrices", &qff_matrices, py::arg("map"), py::arg("times"));
  m.def("rff_matrices", &rff_matrices, py::arg("map"), py::arg("times"));

  // --- bounds ----------------------------------------------------------------
  py::class_<ErrorBudget>(m, "ErrorBudget")
      .def_readonly("em", &ErrorBudget::em)
      .def_readonly("d1_bound", &ErrorBudget::d1_bound)
      .def_readonly("d2_bound", &ErrorBudget::d2_bound);
  m.def("e_m", &e_m, py::arg("order"), py::arg("lengthscale"));
  m.def("theorem2_budget", &theorem2_budget, py::arg("order"), py::arg("lengthscale"));
  m.def("min_order_gprd", &min_order_gprd, py::arg("lengthscale"), py::arg("rho"), py::arg("n"),
        py::arg("c"), py::arg("R"), py::arg("tol"));
  m.def("min_order_risk", &min_order_risk, py::arg("lengthscale"), py::arg("rho"),
        py::arg("lam"), py::arg("gamma"), py::arg("n"), py::arg("eps"));

  // --- GP with derivatives ----------------------------------------------------
  py::class_<DerivObservationSet>(m, "DerivObservationSet")
      .def(py::init<>())
      .def_readwrite("times", &DerivObservationSet::times)
      .def_readwrite("y", &DerivObservationSet::y)
      .def_readwrite("F", &DerivObservationSet::F)
      .def_readwrite("sigma2", &DerivObservationSet::sigma2)
      .def_readwrite("gamma", &DerivObservationSet::gamma);
  py::class_<PosteriorQuery>(m, "PosteriorQuery")
      .def_readonly("tau", &PosteriorQuery::tau)
      .def_readonly("mu", &PosteriorQuery::mu)
      .def_readonly("sigma", &PosteriorQuery::sigma)
      .def_readonly("mu_prime", &PosteriorQuery::mu_prime)
      .def_readonly("sigma_prime", &PosteriorQuery::sigma_prime);
  py::class_<ExactGpDeriv>(m, "ExactGpDeriv")
      .def(py::init<const DerivObservationSet&, const RbfHyperparams&>(), py::arg("obs"),
           py::arg("hyper"))
      .def("query", &ExactGpDeriv::query, py::arg("tau"));
  py::class_<FeatureGpDeriv>(m, "FeatureGpDeriv")
      .def(py::init<const DerivObservationSet&, const QffFeatureMap&>(), py::arg("obs"),
           py::arg("map"))
      .def(py::init<const DerivObservationSet&, const RandomFeatureMap&>(), py::arg("obs"),
           py::arg("map"))
      .def("query", &FeatureGpDeriv::query, py::arg("tau"));
  m.def("exact_posterior", &exact_posterior, py::arg("obs"), py::arg("hyper"), py::arg("tau"));
  m.def("approx_posterior", &approx_posterior, py::arg("obs"), py::arg("map"), py::arg("tau"));

  // --- ODE systems and datasets -----------------------------------------------
  py::class_<OdeSystem>(m, "OdeSystem")
      .def_readonly("name", &OdeSystem::name)
      .def_readonly("state_dim", &OdeSystem::state_dim)
      .def_readonly("param_dim", &OdeSystem::param_dim)
      .def_readonly("true_theta", &OdeSystem::true_theta)
      .def_readonly("x0", &OdeSystem::x0)
      .def_readonly("t_end", &OdeSystem::t_end)
      .def("eval", &OdeSystem::eval, py::arg("x"), py::arg("theta"));
  m.def("lookup_system", &lookup_system, py::return_value_policy::reference,
        py::arg("name"));
  m.def("system_names", &system_names);
  m.def("integrate", &integrate, py::arg("system"), py::arg("theta"), py::arg("x0"),
        py::arg("times"), py::arg("abs_tol") = 1e-9, py::arg("rel_tol") = 1e-8);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def_static("variance", &NoiseSpec::variance, py::arg("value"))
      .def_static("snr", &NoiseSpec::snr, py::arg("value"))
      .def_static("parse", &NoiseSpec::parse, py::arg("text"))
      .def("__repr__", [](const NoiseSpec& n) { return "NoiseSpec(" + n.to_string() + ")"; });
  py::class_<Dataset>(m, "Dataset")
      .def_readonly("system", &Dataset::system)
      .def_readonly("theta_true", &Dataset::theta_true)
      .def_readonly("times", &Dataset::times)
      .def_readonly("states_true", &Dataset::states_true)
      .def_readonly("y", &Dataset::y)
      .def_readonly("sigma2", &Dataset::sigma2)
      .def_readonly("seed", &Dataset::seed);
  m.def("generate_dataset", &generate_dataset, py::arg("system"), py::arg("n"), py::arg("noise"),
        py::arg("seed"));
  m.def("trajectory_rmse", &trajectory_rmse, py::arg("system"), py::arg("theta_hat"),
        py::arg("dataset"));
  m.def("save_dataset_text", &save_dataset_text, py::arg("dataset"), py::arg("path"));
  m.def("load_dataset_text", &load_dataset_text, py::arg("path"));
  m.def("save_dataset_json", &save_dataset_json, py::arg("dataset"), py::arg("path"));
  m.def("load_dataset_json", &load_dataset_json, py::arg("path"));

  // --- hyperparameter fit -------------------------------------------------------
  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("use_features", &FitOptions::use_features)
      .def_readwrite("feature_order", &FitOptions::feature_order)
      .def_readwrite("max_points", &FitOptions::max_points)
      .def_readwrite("l_min", &FitOptions::l_min)
      .def_readwrite("l_max", &FitOptions::l_max);
  py::class_<FittedHyper>(m, "FittedHyper")
      .def_readonly("hyper", &FittedHyper::hyper)
      .def_readonly("sigma2", &FittedHyper::sigma2)
      .def_readonly("objective", &FittedHyper::objective);
  m.def("fit_hyperparams", &fit_hyperparams, py::arg("y"), py::arg("times_unit"),
        py::arg("options") = FitOptions{});

  // --- risk and optimization ------------------------------------------------------
  py::class_<OdinProblem>(m, "OdinProblem")
      .def_readonly("times_unit", &OdinProblem::times_unit)
      .def_readonly("time_scale", &OdinProblem::time_scale)
      .def_readonly("y", &OdinProblem::y)
      .def_readwrite("sigma2", &OdinProblem::sigma2)
      .def_readwrite("gamma", &OdinProblem::gamma)
      .def_readwrite("jitter", &OdinProblem::jitter)
      .def_readwrite("learn_gamma", &OdinProblem::learn_gamma);
  m.def("make_problem", &make_problem_py, py::arg("system"), py::arg("dataset"),
        py::arg("hyper"), py::arg("sigma2"), py::arg("learn_gamma") = true);

  py::class_<RiskValue>(m, "RiskValue")
      .def_readonly("total", &RiskValue::total)
      .def_readonly("prior_term", &RiskValue::prior_term)
      .def_readonly("obs_term", &RiskValue::obs_term)
      .def_readonly("deriv_term", &RiskValue::deriv_term)
      .def_readonly("logdet_term", &RiskValue::logdet_term);
  m.def("exact_risk", &exact_risk, py::arg("problem"), py::arg("x"), py::arg("theta"));
  m.def(
      "feature_risk",
      [](const OdinProblem& p, int order, const Eigen::MatrixXd& x,
         const Eigen::VectorXd& theta) {
        return feature_risk(p, problem_feature_maps(p, order), x, theta);
      },
      py::arg("problem"), py::arg("order"), py::arg("x"), py::arg("theta"));

  py::class_<RiskEvaluator, std::shared_ptr<RiskEvaluator>>(m, "RiskEvaluator")
      .def("value",
           [](RiskEvaluator& ev, const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
             return ev.value(x, theta);
           })
      .def("value_and_grad", [](RiskEvaluator& ev, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma) {
        RiskGradient grad;
        const RiskValue rv = ev.value_and_grad(x, theta, gamma, grad);
        return py::make_tuple(rv, grad.x, grad.theta, grad.gamma);
      });
  m.def("risk_evaluator", &make_risk_evaluator, py::arg("problem"), py::arg("order"),
        "order <= 0 selects the dense reference path");

  py::class_<OptimizeOptions>(m, "OptimizeOptions")
      .def(py::init<>())
      .def_readwrite("max_iterations", &OptimizeOptions::max_iterations)
      .def_readwrite("grad_tol", &OptimizeOptions::grad_tol)
      .def_readwrite("step_tol", &OptimizeOptions::step_tol)
      .def_readwrite("memory", &OptimizeOptions::memory);
  py::class_<OptimizeResult>(m, "OptimizeResult")
      .def_readonly("x", &OptimizeResult::x)
      .def_readonly("theta", &OptimizeResult::theta)
      .def_readonly("gamma", &OptimizeResult::gamma)
      .def_readonly("trace", &OptimizeResult::trace)
      .def_readonly("iterations", &OptimizeResult::iterations)
      .def_readonly("converged", &OptimizeResult::converged)
      .def_readonly("message", &OptimizeResult::message);
  m.def(
      "optimize",
      [](RiskEvaluator& ev, const Eigen::MatrixXd& x0, const Eigen::VectorXd& theta0,
         const OptimizeOptions& options) { return optimize(ev, x0, theta0, options); },
      py::arg("evaluator"), py::arg("x0"), py::arg("theta0"),
      py::arg("options") = OptimizeOptions{});
}
