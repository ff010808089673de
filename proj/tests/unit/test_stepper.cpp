#include <cmath>
#include <memory>

#include "doctest.h"
#include "fvi/error.hpp"
#include "fvi/models.hpp"
#include "fvi/stepper.hpp"
#include "fvi/weight_cache.hpp"
#include "test_problems.hpp"

using namespace fvi;

namespace {

FviConfig config(double h, std::size_t steps) {
  FviConfig c;
  c.h = h;
  c.steps = steps;
  return c;
}

}  // namespace

TEST_SUITE("stepper") {
  TEST_CASE("closed-form qp map agrees with the Newton stepper") {
    const auto spec = damped_oscillator_1d();
    const auto cfg = config(0.1, 100);
    const auto sol = run(spec.problem, lobatto_iiic(2), cfg, spec.x0, spec.p0);
    Eigen::VectorXd x = spec.x0, p = spec.p0;
    for (std::size_t k = 1; k <= 100; ++k) {
      std::tie(x, p) = qp_closed_form(spec.problem, 0.1, x, p);
      REQUIRE((x - sol.positions[k]).cwiseAbs().maxCoeff() < 1e-9);
      REQUIRE((p - sol.momenta[k]).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("closed-form map preconditions") {
    auto spec = damped_oscillator_1d();
    spec.problem.alpha = 0.25;
    CHECK_THROWS_AS(qp_closed_form(spec.problem, 0.1, spec.x0, spec.p0), Error);
  }

  TEST_CASE("Newton converges quadratically on a nonlinear problem") {
    const auto prob = testing::pendulum(0.3, 0.5);
    auto cfg = config(0.4, 6);
    cfg.predictor = Predictor::kConstant;
    cfg.newton_tol = 1e-14;
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 2.5), p0 = Eigen::VectorXd::Constant(1, 0.5);
    const auto sol = run(prob, lobatto_iiic(3), cfg, x0, p0);
    int checked = 0;
    for (const auto& st : sol.newton_stats) {
      CHECK(st.residual < 1e-14);
      const auto& hist = st.history;
      for (std::size_t i = 0; i + 1 < hist.size(); ++i) {
        if (hist[i] < 1e-2 && hist[i + 1] > 1e-13) {
          CHECK(hist[i + 1] <= 50.0 * hist[i] * hist[i]);
          ++checked;
        }
      }
    }
    CHECK(checked > 0);
  }

  TEST_CASE("finite-difference Jacobian gives the same trajectory") {
    const auto prob = testing::pendulum(0.2, 0.25);
    auto cfg = config(0.1, 20);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 1.0), p0 = Eigen::VectorXd::Zero(1);
    const auto a = run(prob, lobatto_iiic(3), cfg, x0, p0);
    cfg.jacobian = JacobianMode::kFiniteDifference;
    const auto b = run(prob, lobatto_iiic(3), cfg, x0, p0);
    for (std::size_t k = 0; k <= 20; ++k) CHECK((a.positions[k] - b.positions[k]).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("Newton failure carries the step and the last iterate") {
    const auto prob = testing::pendulum(0.3, 0.5);
    auto cfg = config(0.5, 4);
    cfg.newton_max_iter = 1;
    cfg.newton_tol = 1e-15;
    cfg.predictor = Predictor::kConstant;
    try {
      (void)run(prob, lobatto_iiic(3), cfg, Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd::Constant(1, 1.0));
      FAIL("expected NewtonFailure");
    } catch (const NewtonFailure& e) {
      CHECK(e.kind() == ErrorKind::kNewtonFailure);
      CHECK(e.step() == 0);
      CHECK(e.residual() > 1e-15);
      CHECK(e.iterate().size() == 2);
    }
  }

  TEST_CASE("solved blocks satisfy the FDEL residual and the initial momentum") {
    const auto spec = coupled_oscillator();
    const auto tab = lobatto_iiic(3);
    const auto cfg = config(0.25, 12);
    auto weights = WeightCache::global().get(tab, -spec.problem.damping_order(), cfg.h, cfg.steps, cfg.contour);
    LobattoFvi fvi(spec.problem, tab, weights, cfg);
    fvi.init_step(spec.x0, spec.p0);
    for (int k = 1; k < 12; ++k) fvi.step();
    CHECK(fvi.completed_steps() == 12);
    CHECK((fvi.legendre_minus(0) - spec.p0).cwiseAbs().maxCoeff() < 1e-11);
    for (std::size_t k = 0; k < 12; ++k) {
      const auto& b = fvi.trajectory()[k];
      Eigen::VectorXd stages(2 * spec.problem.dim);
      for (int i = 1; i < 3; ++i) stages.segment(spec.problem.dim * (i - 1), spec.problem.dim) = b.row(i).transpose();
      CHECK(fvi.residual(k, stages).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS_AS(fvi.damping(40), Error);
    CHECK_THROWS_AS(fvi.init_step(spec.x0, spec.p0), Error);
  }

  TEST_CASE("constructor and stepping errors") {
    const auto spec = damped_oscillator_1d();
    const auto cfg = config(0.1, 4);
    auto w = WeightCache::global().get(lobatto_iiic(2), -1.0, 0.1, 4, cfg.contour);
    CHECK_THROWS_AS(LobattoFvi(spec.problem, lobatto_iiic(3), w, cfg), Error);
    CHECK_THROWS_AS(LobattoFvi(spec.problem, lobatto_iiic(2), w, config(0.2, 4)), Error);
    LobattoFvi fvi(spec.problem, lobatto_iiic(2), w, cfg);
    try {
      fvi.step();
      FAIL("expected missing history");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kHistoryIncomplete);
    }
    CHECK_THROWS_AS(fvi.init_step(Eigen::VectorXd::Zero(2), spec.p0), Error);
    fvi.init_step(spec.x0, spec.p0);
    for (int k = 1; k < 5; ++k) fvi.step();
    try {
      fvi.step();
      FAIL("expected weight horizon error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kIndexOutOfRange);
    }
    FviConfig bad = cfg;
    bad.h = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.steps = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("undamped runs conserve energy without drift") {
    const auto prob = testing::weighted_oscillator(2, 0.0, 0.5);
    const Eigen::VectorXd x0 = Eigen::Vector2d(1.0, -0.5), p0 = Eigen::Vector2d(0.0, 0.3);
    const auto sol = run(prob, lobatto_iiic(2), config(0.1, 2000), x0, p0);
    const double e0 = energy(prob, x0, p0);
    double worst = 0;
    for (std::size_t k = 0; k < sol.positions.size(); ++k) {
      worst = std::max(worst, std::abs(energy(prob, sol.positions[k], sol.momenta[k]) - e0));
    }
    CHECK(worst < 5e-3 * e0);
  }

  TEST_CASE("runs are deterministic") {
    const auto spec = bagley_torvik();
    const auto cfg = config(1.0 / 32, 32);
    const auto a = run(spec.problem, lobatto_iiic(4), cfg, spec.x0, spec.p0);
    const auto b = run(spec.problem, lobatto_iiic(4), cfg, spec.x0, spec.p0);
    for (std::size_t k = 0; k < a.positions.size(); ++k) REQUIRE(a.positions[k] == b.positions[k]);
    CHECK(a.weights_fingerprint == b.weights_fingerprint);
    CHECK(a.times.back() == doctest::Approx(1.0));
    CHECK(a.positions.size() == 33);
    CHECK(a.trajectory.size() == 32);
  }

  TEST_CASE("Lobatto and MIDCQ runs approach the exact solution") {
    const auto spec = damped_oscillator_1d();
    const auto exact = (*spec.problem.exact_solution)(2.0).first;
    double prev_l = 0, prev_m = 0;
    for (std::size_t n : {20, 40, 80}) {
      const auto cfg = config(2.0 / static_cast<double>(n), n);
      const auto l = run(spec.problem, lobatto_iiic(2), cfg, spec.x0, spec.p0);
      const auto m = run_midcq(spec.problem, cfg, spec.x0, spec.p0);
      const double el = (l.positions.back() - exact).cwiseAbs().maxCoeff();
      const double em = (m.positions.back() - exact).cwiseAbs().maxCoeff();
      if (prev_l > 0) {
        CHECK(prev_l / el == doctest::Approx(4.0).epsilon(0.15));
        CHECK(prev_m / em == doctest::Approx(4.0).epsilon(0.15));
      }
      prev_l = el;
      prev_m = em;
    }
  }

  TEST_CASE("MIDCQ stepper errors") {
    const auto spec = damped_oscillator_1d();
    const auto cfg = config(0.1, 4);
    CHECK_THROWS_AS(MidcqFvi(spec.problem, midcq_weights(-1.0, 0.2, 4), cfg), Error);
    MidcqFvi m(spec.problem, midcq_weights(-1.0, 0.1, 4), cfg);
    CHECK_THROWS_AS(m.step(), Error);
    m.init_step(spec.x0, spec.p0);
    CHECK(m.completed_steps() == 1);
    CHECK_THROWS_AS(m.init_step(spec.x0, spec.p0), Error);
    CHECK(m.nodes().size() == 2);
  }
}
