#include "fvi/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "fvi/cq.hpp"
#include "fvi/galerkin.hpp"
#include "fvi/harness.hpp"
#include "fvi/models.hpp"
#include "fvi/oracle.hpp"
#include "fvi/stepper.hpp"
#include "fvi/tableau.hpp"
#include "fvi/variational.hpp"
#include "fvi/weight_cache.hpp"

namespace fvi {

namespace {

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

CheckResult bound(std::string name, double value, double limit) {
  return {std::move(name), value < limit, sci(value) + " < " + sci(limit)};
}

StageTrajectory random_trajectory(std::mt19937_64& rng, int dim, int r, std::size_t blocks, double h) {
  std::normal_distribution<double> g;
  StageTrajectory t(dim, r, h, false);
  for (std::size_t k = 0; k < blocks; ++k) {
    Eigen::MatrixXd b(r, dim);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
    t.append(std::move(b));
  }
  return t;
}

CheckResult tableau_inverse() {
  double worst = 0.0;
  for (const auto& tab : {lobatto_iiic(2), lobatto_iiic(3), lobatto_iiic(4), midpoint()}) {
    const int r = tab.stages();
    worst = std::max(worst, (tab.a() * tab.a_inverse() - Eigen::MatrixXd::Identity(r, r)).lpNorm<Eigen::Infinity>());
  }
  return bound("tableau: A A^-1 = I", worst, 1e-14);
}

CheckResult gamma_forms() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rad(0.0, 0.9), ang(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  for (int r = 2; r <= 4; ++r) {
    const auto tab = lobatto_iiic(r);
    for (int i = 0; i < 20; ++i) {
      const auto z = std::polar(rad(rng), ang(rng));
      worst = std::max(worst, (gamma(tab, z) - oracle::gamma_by_inversion(tab.a(), tab.b(), z)).cwiseAbs().maxCoeff());
    }
  }
  return bound("tableau: gamma(z) matches direct inversion", worst, 1e-12);
}

CheckResult imaginary_axis() {
  double worst = 0.0;
  for (const auto& tab : {lobatto_iiic(2), lobatto_iiic(3), lobatto_iiic(4), midpoint()}) {
    for (int i = 0; i <= 60; ++i) {
      const double y = std::pow(10.0, -3.0 + 0.1 * i);
      worst = std::max(worst, std::abs(stability(tab, {0.0, y})) - 1.0);
    }
  }
  return {"tableau: |R(iy)| <= 1", worst <= 1e-12, "max |R(iy)| - 1 = " + sci(worst)};
}

CheckResult derivative_weights() {
  const double h = 0.1;
  const auto w = compute_weights(lobatto_iiic(2), -1.0, h, 64);
  Eigen::Matrix2d w0, w1;
  w0 << 1, 1, -1, 1;
  w1 << 0, -2, 0, 0;
  double worst = std::max((h * w[0] - w0).lpNorm<Eigen::Infinity>(), (h * w[1] - w1).lpNorm<Eigen::Infinity>());
  for (std::size_t n = 2; n < w.count(); ++n) worst = std::max(worst, h * w[n].lpNorm<Eigen::Infinity>());
  return bound("cq: two-stage first-derivative weights", worst, 1e-8);
}

CheckResult semigroup() {
  double worst = 0.0;
  for (int r = 2; r <= 3; ++r) {
    const auto tab = lobatto_iiic(r);
    for (double e : {-0.25, -0.5}) {
      const auto half = compute_weights(tab, e, 0.05, 32);
      const auto full = compute_weights(tab, 2.0 * e, 0.05, 32);
      const auto conv = oracle::brute_convolve(half.matrices(), half.matrices());
      for (std::size_t n = 0; n < conv.size(); ++n) {
        worst = std::max(worst, (conv[n] - full[n]).cwiseAbs().maxCoeff() / full.max_norm());
      }
    }
  }
  return bound("cq: semigroup W^a * W^a = W^2a (relative)", worst, 1e-7);
}

CheckResult integration_by_parts() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int r = 2; r <= 3; ++r) {
    const auto tab = lobatto_iiic(r);
    const auto w = compute_weights(tab, -0.5, 0.1, 16);
    for (int trial = 0; trial < 20; ++trial) {
      const auto f = random_trajectory(rng, 2, r, 17, 0.1);
      const auto g = random_trajectory(rng, 2, r, 17, 0.1);
      StageTrajectory bf(2, r, 0.1, false);
      for (std::size_t k = 0; k < f.size(); ++k) bf.append(tab.b().asDiagonal() * f[k]);
      double lhs = 0, rhs = 0, lhs_b = 0, rhs_b = 0;
      for (std::size_t k = 0; k <= 16; ++k) {
        const auto adv = apply_advanced(w, g, k);
        lhs += g[k].cwiseProduct(apply_retarded(w, f, k)).sum();
        rhs += adv.cwiseProduct(f[k]).sum();
        lhs_b += g[k].cwiseProduct(apply_retarded(w, bf, k)).sum();
        rhs_b += (tab.b().asDiagonal() * adv).cwiseProduct(f[k]).sum();
      }
      worst = std::max({worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)),
                        std::abs(lhs_b - rhs_b) / (1.0 + std::abs(lhs_b))});
    }
  }
  return bound("cq: asymmetric integration by parts (plain and B-weighted)", worst, 1e-10);
}

CheckResult midcq_series() {
  const auto w = midcq_weights(-1.0, 1.0, 16);
  double worst = std::abs(w[0] - 2.0);
  for (std::size_t n = 1; n < w.count(); ++n) worst = std::max(worst, std::abs(w[n] - (n % 2 ? -4.0 : 4.0)));
  const auto half = midcq_weights(-0.5, 0.1, 32);
  const auto full = midcq_weights(-1.0, 0.1, 32);
  const auto conv = oracle::brute_convolve(half.w, half.w);
  for (std::size_t n = 0; n < conv.size(); ++n) worst = std::max(worst, std::abs(conv[n] - full[n]) * full.h);
  return bound("cq: MIDCQ series and half-order self-product", worst, 1e-12);
}

CheckResult lagrangian_gradient() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  auto spec = bagley_torvik();
  double worst = 0.0;
  for (int r = 2; r <= 4; ++r) {
    const auto tab = lobatto_iiic(r);
    const auto basis = basis_for(tab);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd v(r);
      for (int i = 0; i < r; ++i) v(i) = g(rng);
      auto ld = [&](const Eigen::VectorXd& s) { return discrete_lagrangian(spec.problem, tab, basis, s, 0.3, 0.2); };
      const Eigen::VectorXd fd = oracle::central_gradient(ld, v, 1e-6);
      const Eigen::VectorXd an = d_lagrangian(spec.problem, tab, basis, v, 0.3, 0.2).col(0);
      worst = std::max(worst, (fd - an).lpNorm<Eigen::Infinity>() / (1.0 + an.lpNorm<Eigen::Infinity>()));
    }
  }
  return bound("galerkin: analytic D_i L_d vs finite differences", worst, 1e-6);
}

CheckResult closed_form_agreement(double tol) {
  const auto spec = coupled_oscillator();
  FviConfig cfg;
  cfg.h = 0.2;
  cfg.steps = 100;
  cfg.newton_tol = tol;
  const auto sol = run(spec.problem, lobatto_iiic(2), cfg, spec.x0, spec.p0);
  Eigen::VectorXd x = spec.x0, p = spec.p0;
  double worst = 0.0;
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    std::tie(x, p) = qp_closed_form(spec.problem, cfg.h, x, p);
    worst = std::max({worst, (x - sol.positions[k]).lpNorm<Eigen::Infinity>(),
                      (p - sol.momenta[k]).lpNorm<Eigen::Infinity>()});
  }
  return bound("stepper: closed-form qp map vs Newton stepper", worst, 1e-9);
}

CheckResult energy_decay(double tol) {
  const auto spec = coupled_oscillator();
  RunOptions opt;
  opt.newton_tol = tol;
  const auto sol = run_method(spec, Method::kLobatto2, 100, 20.0, opt);
  const auto err = relative_energy_error(spec, sol.times, *sol.energy);
  double worst = 0.0;
  for (double e : err) worst = std::max(worst, std::abs(e));
  const bool decays = sol.energy->back() < 0.5 * sol.energy->front();
  return {"models: energy error and decay, h = 0.2", worst < 1e-2 && decays,
          "max |E_err| = " + sci(worst) + ", E_N / E_0 = " + sci(sol.energy->back() / sol.energy->front())};
}

CheckResult exact_solutions() {
  double worst = 0.0;
  for (const auto& name : benchmark_names()) worst = std::max(worst, *exact_solution_residual(benchmark_by_name(name)));
  return bound("models: exact solutions satisfy their equations", worst, 1e-8);
}

CheckResult action_stationarity(double tol) {
  const auto spec = coupled_oscillator();
  const auto tab = lobatto_iiic(2);
  FviConfig cfg;
  cfg.h = 0.2;
  cfg.steps = 8;
  cfg.newton_tol = tol;
  WeightCache cache;
  const auto sol = run(spec.problem, tab, cfg, spec.x0, spec.p0, &cache);
  const auto w2 = cache.get(tab, -spec.problem.damping_order(), cfg.h, cfg.steps, cfg.contour);
  const auto w1 = cache.get(tab, -spec.problem.alpha, cfg.h, cfg.steps, cfg.contour);
  const auto basis = basis_for(tab);
  const auto x = close_trajectory(sol.trajectory);
  const auto y = solve_y_equations(spec.problem, tab, basis, *w2, x);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd delta(free_variable_count(x));
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = g(rng);
    delta.normalize();
    worst = std::max(worst, std::abs(action_directional_derivative(spec.problem, tab, basis, *w1, x, y, spec.x0, delta)));
  }
  return bound("variational: action stationary under restricted variations", worst, 1e-8);
}

}  // namespace

std::vector<CheckResult> run_property_suite(double newton_tol) {
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
      {"tableau: A A^-1 = I", tableau_inverse},
      {"tableau: gamma(z) matches direct inversion", gamma_forms},
      {"tableau: |R(iy)| <= 1", imaginary_axis},
      {"cq: two-stage first-derivative weights", derivative_weights},
      {"cq: semigroup W^a * W^a = W^2a (relative)", semigroup},
      {"cq: asymmetric integration by parts (plain and B-weighted)", integration_by_parts},
      {"cq: MIDCQ series and half-order self-product", midcq_series},
      {"galerkin: analytic D_i L_d vs finite differences", lagrangian_gradient},
      {"stepper: closed-form qp map vs Newton stepper", [&] { return closed_form_agreement(newton_tol); }},
      {"models: exact solutions satisfy their equations", exact_solutions},
      {"models: energy error and decay, h = 0.2", [&] { return energy_decay(newton_tol); }},
      {"variational: action stationary under restricted variations", [&] { return action_stationarity(newton_tol); }},
  };
  std::vector<CheckResult> results;
  for (const auto& [name, check] : checks) {
    try {
      results.push_back(check());
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return results;
}

}  // namespace fvi
