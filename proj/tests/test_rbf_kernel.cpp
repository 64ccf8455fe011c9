#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qffgp/errors.hpp"
#include "qffgp/rbf_kernel.hpp"
#include "qffgp/rng.hpp"

using namespace qffgp;
namespace oracle = qffgp::testing;

namespace {
constexpr double kSqrtPi = 1.7724538509055160272981674833411;

// 4th-order stencils; the plain 2-point difference cannot reach the required
// absolute accuracy at l = 0.1.
double fd_d1(const RbfHyperparams& h, double r, double step) {
  auto g = [&](double x) { return kernel_eval(h, x); };
  return (-g(r + 2 * step) + 8 * g(r + step) - 8 * g(r - step) + g(r - 2 * step)) / (12 * step);
}

double fd_d2_mixed(const RbfHyperparams& h, double r, double step) {
  // d^2/(da db) k(a-b) = -d^2/dr^2 k(r); five-point second derivative.
  auto g = [&](double x) { return kernel_eval(h, x); };
  const double second = (-g(r + 2 * step) + 16 * g(r + step) - 30 * g(r) + 16 * g(r - step) -
                         g(r - 2 * step)) /
                        (12 * step * step);
  return -second;
}
}  // namespace

TEST_CASE("kernel closed-form values") {
  CHECK(kernel_eval({1.0, 1.0}, 0.0) == doctest::Approx(1.0));
  CHECK(kernel_eval({1.0, 1.0}, 1.0) == doctest::Approx(0.60653065971263342).epsilon(1e-14));
  CHECK(kernel_eval({kSqrtPi, 0.1}, 0.0) == doctest::Approx(kSqrtPi).epsilon(1e-14));
  CHECK(kernel_eval({2.0, 0.5}, 0.3) == kernel_eval({2.0, 0.5}, -0.3));

  CHECK(kernel_d1({3.0, 0.7}, 0.0) == 0.0);
  CHECK(kernel_d1({1.0, 1.0}, 1.0) == doctest::Approx(-0.60653065971263342).epsilon(1e-14));

  CHECK(kernel_d2({1.0, 1.0}, 0.0) == doctest::Approx(1.0));
  CHECK(kernel_d2({1.0, 1.0}, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("plain central difference at r = 0.3") {
  const RbfHyperparams h{1.0, 1.0};
  const double delta = 1e-6;
  const double fd = (kernel_eval(h, 0.3 + delta) - kernel_eval(h, 0.3 - delta)) / (2 * delta);
  CHECK(std::abs(kernel_d1(h, 0.3) - fd) < 1e-7);
}

TEST_CASE("derivatives match finite differences on the grid") {
  for (const RbfHyperparams h : {RbfHyperparams{1.0, 1.0}, RbfHyperparams{kSqrtPi, 0.1},
                                 RbfHyperparams{2.0, 0.5}}) {
    CAPTURE(h.lengthscale);
    const double step = h.lengthscale / 100.0;
    for (int i = 0; i <= 40; ++i) {
      const double r = -1.0 + 2.0 * i / 40.0;
      CHECK(std::abs(kernel_d1(h, r) - fd_d1(h, r, step)) < 1e-6);
      CHECK(std::abs(kernel_d2(h, r) - fd_d2_mixed(h, r, step)) < 1e-6);
    }
  }
}

TEST_CASE("gram matrix structure") {
  const RbfHyperparams h{1.7, 0.6};

  SUBCASE("single point") {
    const KernelMatrices km = gram_matrices(h, Eigen::VectorXd::Constant(1, 0.4));
    CHECK(km.C(0, 0) == doctest::Approx(1.7));
    CHECK(km.pC(0, 0) == 0.0);
    CHECK(km.Cp(0, 0) == 0.0);
    CHECK(km.Cpp(0, 0) == doctest::Approx(1.7 / 0.36));
  }

  SUBCASE("two points, hand values") {
    const RbfHyperparams unit{1.0, 1.0};
    Eigen::VectorXd t(2);
    t << 0.0, 1.0;
    const KernelMatrices km = gram_matrices(unit, t);
    const double e = 0.60653065971263342;
    CHECK(km.C(0, 1) == doctest::Approx(e).epsilon(1e-14));
    // pC[0,1] = d/da k at r = -1 -> +e^{-1/2}; pC[1,0] = -e^{-1/2}.
    CHECK(km.pC(0, 1) == doctest::Approx(e).epsilon(1e-14));
    CHECK(km.pC(1, 0) == doctest::Approx(-e).epsilon(1e-14));
    CHECK(km.Cpp(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("transpose and sign identities on a random grid") {
    SplitMix64 rng(7);
    Eigen::VectorXd t(9);
    for (int i = 0; i < 9; ++i) t[i] = rng.next_uniform();
    const KernelMatrices km = gram_matrices(h, t);
    CHECK((km.pC - km.Cp.transpose()).norm() == 0.0);
    CHECK((km.pC + km.Cp).norm() == 0.0);
    CHECK((km.C - km.C.transpose()).norm() == 0.0);
    CHECK((km.Cpp - km.Cpp.transpose()).norm() == 0.0);
    CHECK(km.C.diagonal().isConstant(h.variance));
    CHECK(km.pC.diagonal().isZero());
  }
}

TEST_CASE("model matrices") {
  const RbfHyperparams h{1.3, 0.35};

  SUBCASE("single point") {
    const KernelMatrices km = gram_matrices(h, Eigen::VectorXd::Zero(1));
    const GpDerivModelMatrices mm = model_matrices(km, 1e-8);
    CHECK(mm.D(0, 0) == 0.0);
    CHECK(mm.A(0, 0) == doctest::Approx(1.3 / (0.35 * 0.35)));
  }

  SUBCASE("agrees with the joint-conditioning oracle") {
    SplitMix64 rng(123);
    for (int n : {3, 8, 20}) {
      Eigen::VectorXd t(n);
      for (int i = 0; i < n; ++i) t[i] = rng.next_uniform();
      std::sort(t.data(), t.data() + n);
      const KernelMatrices km = gram_matrices(h, t);
      const double jitter = 1e-6 * h.variance;
      const GpDerivModelMatrices mm = model_matrices(km, jitter);
      const auto ref = oracle::condition_derivatives(km, jitter);
      CHECK((mm.D - ref.D).norm() <= 1e-8 * std::max(1.0, ref.D.norm()));
      const Eigen::MatrixXd a_ref = 0.5 * (ref.A + ref.A.transpose());
      CHECK((mm.A - a_ref).norm() <= 1e-8 * std::max(1.0, a_ref.norm()));
    }
  }

  SUBCASE("A is positive semidefinite up to round-off") {
    SplitMix64 rng(99);
    for (int n : {5, 17, 50}) {
      Eigen::VectorXd t(n);
      for (int i = 0; i < n; ++i) t[i] = rng.next_uniform();
      const GpDerivModelMatrices mm = model_matrices(gram_matrices(h, t), default_jitter(h));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mm.A);
      CHECK(es.eigenvalues().minCoeff() >=
            -1e-8 * h.variance / (h.lengthscale * h.lengthscale));
    }
  }

  SUBCASE("large jitter limit: D -> 0, A -> Cpp") {
    Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);
    const KernelMatrices km = gram_matrices(h, t);
    const double lambda = 1e9;
    const GpDerivModelMatrices mm = model_matrices(km, lambda);
    CHECK(mm.D.cwiseAbs().maxCoeff() < 100.0 / lambda);
    CHECK((mm.A - km.Cpp).cwiseAbs().maxCoeff() < 100.0 / lambda);
  }

  SUBCASE("invalid jitter") {
    const KernelMatrices km = gram_matrices(h, Eigen::VectorXd::Zero(1));
    CHECK_THROWS_AS(model_matrices(km, 0.0), DomainError);
  }
}
