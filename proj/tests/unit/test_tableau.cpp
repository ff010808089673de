#include <cmath>
#include <complex>

#include "doctest.h"
#include "fvi/error.hpp"
#include "fvi/oracle.hpp"
#include "fvi/tableau.hpp"

using namespace fvi;

TEST_SUITE("tableau") {
  TEST_CASE("two-stage Lobatto IIIC coefficients") {
    const auto t = lobatto_iiic(2);
    Eigen::Matrix2d a;
    a << 0.5, -0.5, 0.5, 0.5;
    CHECK((t.a() - a).cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.b()(0) == 0.5);
    CHECK(t.b()(1) == 0.5);
    CHECK(t.c()(0) == 0.0);
    CHECK(t.c()(1) == 1.0);
    CHECK(t.order() == 2);
    CHECK(t.stage_order() == 1);
    CHECK(t.label() == "lobatto2");
  }

  TEST_CASE("Lobatto IIIC families are consistent") {
    for (int r = 2; r <= 4; ++r) {
      CAPTURE(r);
      const auto t = lobatto_iiic(r);
      CHECK(t.stages() == r);
      CHECK(t.order() == 2 * r - 2);
      CHECK(t.stage_order() == r - 1);
      CHECK(t.has_endpoint_stages());
      CHECK(t.b().sum() == doctest::Approx(1.0).epsilon(1e-15));
      // row sums of A reproduce c, and the last row equals b (stiff accuracy)
      CHECK((t.a().rowwise().sum() - t.c()).cwiseAbs().maxCoeff() < 1e-15);
      CHECK((t.a().row(r - 1).transpose() - t.b()).cwiseAbs().maxCoeff() < 1e-15);
      CHECK((t.a() * t.a_inverse() - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-14);
      // first column constant b_1 in Lobatto IIIC
      CHECK((t.a().col(0).array() - t.b()(0)).abs().maxCoeff() < 1e-15);
    }
  }

  TEST_CASE("midpoint rule") {
    const auto t = midpoint();
    CHECK(t.stages() == 1);
    CHECK(t.a()(0, 0) == 0.5);
    CHECK(t.c()(0) == 0.5);
    CHECK_FALSE(t.has_endpoint_stages());
    CHECK(t.order() == 2);
  }

  TEST_CASE("stability function of the two-stage method") {
    const auto t = lobatto_iiic(2);
    for (double x : {-3.0, -0.5, 0.25, 1.0}) {
      const std::complex<double> z(x, 0.7);
      CHECK(std::abs(stability(t, z) - 1.0 / (1.0 - z + 0.5 * z * z)) < 1e-14);
    }
  }

  TEST_CASE("R(z) approximates exp(z) to the classical order") {
    for (int r = 2; r <= 4; ++r) {
      CAPTURE(r);
      const auto t = lobatto_iiic(r);
      const double e1 = std::abs(stability(t, {0.1, 0.0}) - std::exp(0.1));
      const double e2 = std::abs(stability(t, {0.05, 0.0}) - std::exp(0.05));
      CHECK(std::log2(e1 / e2) == doctest::Approx(t.order() + 1).epsilon(0.05));
    }
  }

  TEST_CASE("L-stability and A-stability on the imaginary axis") {
    for (int r = 2; r <= 4; ++r) {
      const auto t = lobatto_iiic(r);
      CHECK(std::abs(stability(t, {-1e8, 0.0})) < 1e-7);
      for (double y = 1e-3; y < 1e3; y *= 1.7) CHECK(std::abs(stability(t, {0.0, y})) <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("stability pole is reported") {
    // I − zA is singular at z = 2 for the midpoint rule
    try {
      (void)stability(midpoint(), {2.0, 0.0});
      FAIL("expected a pole");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kStabilityPole);
    }
  }

  TEST_CASE("gamma matches direct inversion and gamma(0) = A^-1") {
    for (int r = 2; r <= 4; ++r) {
      const auto t = lobatto_iiic(r);
      CHECK((gamma(t, 0.0) - t.a_inverse().cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-15);
      for (auto z : {std::complex<double>(0.3, 0.2), std::complex<double>(-0.7, 0.1), std::complex<double>(0.0, -0.9)}) {
        CHECK((gamma(t, z) - oracle::gamma_by_inversion(t.a(), t.b(), z)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  TEST_CASE("gamma(1) annihilates constants for stiffly accurate tableaux") {
    for (int r = 2; r <= 4; ++r) {
      const auto t = lobatto_iiic(r);
      const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(r);
      CHECK((gamma(t, 1.0) * ones).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(lobatto_iiic(5), Error);
    try {
      (void)lobatto_iiic(1);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kUnsupportedStageCount);
    }
    try {
      (void)tableau_by_name("radau5");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidArgument);
    }
    CHECK(tableau_by_name("lobatto3").stages() == 3);
    CHECK(tableau_by_name("midcq").stages() == 1);
    try {
      ButcherTableau bad("bad", Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(0.3, 0.3), Eigen::Vector2d(0, 1), 1, 1);
      FAIL("expected invalid weights");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidArgument);
    }
    try {
      ButcherTableau bad("bad", Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0, 1), 1, 1);
      FAIL("expected singular A");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidArgument);
    }
    try {
      ButcherTableau bad("bad", Eigen::MatrixXd::Identity(3, 3), Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0, 1), 1, 1);
      FAIL("expected shape mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kShapeMismatch);
    }
  }
}
