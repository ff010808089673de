#include <cmath>
#include <random>

#include "doctest.h"
#include "fvi/error.hpp"
#include "fvi/galerkin.hpp"
#include "fvi/oracle.hpp"
#include "fvi/tableau.hpp"
#include "test_problems.hpp"

using namespace fvi;

TEST_SUITE("galerkin") {
  TEST_CASE("Lagrange basis is a cardinal partition of unity") {
    const Eigen::Vector3d nodes(0.0, 0.4, 1.0);
    const auto at_nodes = lagrange_basis(nodes, nodes);
    CHECK((at_nodes.eval - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::Vector4d x(0.1, 0.3, 0.7, 0.9);
    const auto b = lagrange_basis(nodes, x);
    CHECK((b.eval.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
    CHECK(b.deriv.colwise().sum().cwiseAbs().maxCoeff() < 1e-13);
    // reproduces the derivative of a quadratic
    for (int i = 0; i < 4; ++i) {
      double d = 0;
      for (int nu = 0; nu < 3; ++nu) d += nodes(nu) * nodes(nu) * b.deriv(nu, i);
      CHECK(d == doctest::Approx(2 * x(i)));
    }
    CHECK(b.control_points() == 3);
    CHECK(b.quadrature_points() == 4);
  }

  TEST_CASE("basis selection") {
    CHECK(basis_for(lobatto_iiic(3)).nodes.size() == 3);
    const auto m = basis_for(midpoint());
    REQUIRE(m.nodes.size() == 2);
    CHECK(m.nodes(0) == 0.0);
    CHECK(m.nodes(1) == 1.0);
    CHECK(m.eval(0, 0) == doctest::Approx(0.5));
  }

  TEST_CASE("degenerate nodes") {
    try {
      (void)lagrange_basis(Eigen::Vector3d(0.0, 0.5, 0.5), Eigen::Vector2d(0.1, 0.2));
      FAIL("expected degenerate nodes");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDegenerateNodes);
    }
    CHECK_THROWS_AS(lagrange_basis(Eigen::VectorXd::Zero(1), Eigen::Vector2d(0.1, 0.2)), Error);
  }

  TEST_CASE("free particle discrete Lagrangian is exact") {
    auto prob = testing::weighted_oscillator(2, 0.0, 0.5);
    prob.potential = [](double, const Eigen::VectorXd&) { return 0.0; };
    prob.grad_potential = [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()); };
    const auto tab = lobatto_iiic(3);
    const auto basis = basis_for(tab);
    Eigen::MatrixXd s(3, 2);
    s << 0, 1, 0.5, 1.5, 1, 2;  // linear path, velocity (1, 1)/h·h = 1
    const double h = 0.5;
    const double expected = h * 0.5 * (Eigen::Vector2d(2, 2).transpose() * prob.mass * Eigen::Vector2d(2, 2))(0);
    CHECK(discrete_lagrangian(prob, tab, basis, s, 0.0, h) == doctest::Approx(expected));
  }

  TEST_CASE("analytic derivatives match finite differences") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    const auto prob = testing::weighted_oscillator(2, 0.0, 0.5);
    for (int r = 2; r <= 4; ++r) {
      CAPTURE(r);
      const auto tab = lobatto_iiic(r);
      const auto basis = basis_for(tab);
      Eigen::MatrixXd s(r, 2);
      for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = g(rng);
      const double h = 0.3;
      auto flat = [&](const Eigen::VectorXd& v) {
        return discrete_lagrangian(prob, tab, basis, Eigen::Map<const Eigen::MatrixXd>(v.data(), r, 2), 0.1, h);
      };
      const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
      const Eigen::VectorXd fd = oracle::central_gradient(flat, v, 1e-6);
      const Eigen::MatrixXd an = d_lagrangian(prob, tab, basis, s, 0.1, h);
      CHECK((Eigen::Map<const Eigen::VectorXd>(an.data(), an.size()) - fd).cwiseAbs().maxCoeff() < 1e-7);
      for (int i = 0; i < r; ++i) {
        CHECK((d_i_lagrangian(prob, tab, basis, s, 0.1, h, i).transpose() - an.row(i)).cwiseAbs().maxCoeff() < 1e-14);
      }

      // Hessian against differences of the gradient (stage-major stacking)
      const Eigen::MatrixXd hess = d2_lagrangian(prob, tab, basis, s, 0.1, h);
      REQUIRE(hess.rows() == 2 * r);
      for (int j = 0; j < r; ++j) {
        for (int c = 0; c < 2; ++c) {
          Eigen::MatrixXd sp = s, sm = s;
          sp(j, c) += 1e-6;
          sm(j, c) -= 1e-6;
          const Eigen::MatrixXd col = (d_lagrangian(prob, tab, basis, sp, 0.1, h) - d_lagrangian(prob, tab, basis, sm, 0.1, h)) / 2e-6;
          for (int i = 0; i < r; ++i) {
            for (int e = 0; e < 2; ++e) CHECK(hess(2 * i + e, 2 * j + c) == doctest::Approx(col(i, e)).epsilon(1e-6));
          }
        }
      }

      // origin + increments form
      Eigen::MatrixXd inc = s.rowwise() - s.row(0);
      const Eigen::VectorXd origin = s.row(0).transpose();
      CHECK((d_lagrangian(prob, tab, basis, origin, inc, 0.1, h) - an).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("Hessian falls back to finite differences") {
    auto p = testing::pendulum();
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.7);
    const double analytic = p.hessian_at(0.0, x)(0, 0);
    p.hessian = nullptr;
    CHECK(p.hessian_at(0.0, x)(0, 0) == doctest::Approx(analytic).epsilon(1e-6));
  }

  TEST_CASE("problem validation") {
    auto p = testing::weighted_oscillator(2, 0.1, 0.5);
    CHECK_NOTHROW(p.validate());
    CHECK(p.damping_order() == 1.0);
    auto bad = p;
    bad.rho = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = p;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = p;
    bad.mass(0, 0) = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = p;
    bad.mass = Eigen::MatrixXd::Identity(3, 3);
    try {
      bad.validate();
      FAIL("expected shape mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kShapeMismatch);
    }
    const auto tab = lobatto_iiic(2);
    try {
      (void)d_lagrangian(p, tab, basis_for(tab), Eigen::MatrixXd::Zero(3, 2), 0.0, 0.1);
      FAIL("expected shape mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kShapeMismatch);
    }
  }
}
