#include "fvi/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fvi/error.hpp"
#include "fvi/oracle.hpp"

namespace fvi {

namespace {

// x(t) = e^{−ρt/2}(x₀ cos ωt + ((v₀ + ρx₀/2)/ω) sin ωt), ω = √(η − ρ²/4).
struct Underdamped {
  double eta;
  double rho;

  double omega() const { return std::sqrt(eta - 0.25 * rho * rho); }

  std::pair<double, double> operator()(double x0, double v0, double t) const {
    const double w = omega();
    const double a = x0;
    const double b = (v0 + 0.5 * rho * x0) / w;
    const double decay = std::exp(-0.5 * rho * t);
    const double c = std::cos(w * t);
    const double s = std::sin(w * t);
    const double x = decay * (a * c + b * s);
    const double v = decay * ((b * w - 0.5 * rho * a) * c - (a * w + 0.5 * rho * b) * s);
    return {x, v};
  }
};

BenchmarkSpec linear_oscillator(std::string name, double eta, double rho, Eigen::VectorXd x0, Eigen::VectorXd v0,
                                double horizon, std::string reference) {
  const int d = static_cast<int>(x0.size());
  BenchmarkSpec spec;
  spec.name = std::move(name);
  spec.x0 = x0;
  spec.p0 = v0;
  spec.horizon = horizon;
  spec.reference = std::move(reference);

  auto& prob = spec.problem;
  prob.dim = d;
  prob.rho = rho;
  prob.alpha = 0.5;
  prob.grad_potential = [eta](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return eta * x; };
  prob.potential = [eta](double, const Eigen::VectorXd& x) { return 0.5 * eta * x.squaredNorm(); };
  prob.hessian = [eta, d](double, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return eta * Eigen::MatrixXd::Identity(d, d);
  };
  const Underdamped flow{eta, rho};
  prob.exact_solution = [flow, x0, v0](double t) {
    Eigen::VectorXd x(x0.size()), p(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) std::tie(x(i), p(i)) = flow(x0(i), v0(i), t);
    return std::make_pair(x, p);
  };
  // D¹x = ẋ = p for unit mass.
  spec.exact_damping = [exact = *prob.exact_solution](double t) { return exact(t).second; };
  return spec;
}

}  // namespace

BenchmarkSpec coupled_oscillator() {
  return linear_oscillator("coupled-oscillator", 0.5, 0.25, Eigen::Vector2d(0.8, -0.5), Eigen::Vector2d(0.4, 0.0),
                           20.0, "two-mass oscillator with first-order damping, h = 0.2 energy study");
}

BenchmarkSpec damped_oscillator_1d() {
  return linear_oscillator("damped-oscillator-1d", 1.0, 0.25, Eigen::VectorXd::Constant(1, 1.0),
                           Eigen::VectorXd::Constant(1, 0.5), 16.0, "1D damped oscillator, MIDCQ order study");
}

BenchmarkSpec bagley_torvik() {
  // f(t) = t³ + 6t + D^(1/2)t³, with D^(1/2)t³ = Γ(4)/Γ(3.5) t^(5/2).
  const double c = std::tgamma(4.0) / std::tgamma(3.5);
  auto forcing = [c](double t) { return t * t * t + 6.0 * t + c * std::pow(std::max(t, 0.0), 2.5); };

  BenchmarkSpec spec;
  spec.name = "bagley-torvik";
  spec.x0 = Eigen::VectorXd::Zero(1);
  spec.p0 = Eigen::VectorXd::Zero(1);
  spec.horizon = 1.0;
  spec.reference = "x'' + D^(1/2) x + x = f(t), exact solution t^3";

  auto& prob = spec.problem;
  prob.dim = 1;
  prob.rho = 1.0;
  prob.alpha = 0.25;
  prob.grad_potential = [forcing](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return x.array() - forcing(t);
  };
  prob.potential = [forcing](double t, const Eigen::VectorXd& x) { return 0.5 * x(0) * x(0) - x(0) * forcing(t); };
  prob.hessian = [](double, const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Identity(1, 1); };
  prob.exact_solution = [](double t) {
    return std::make_pair(Eigen::VectorXd::Constant(1, t * t * t), Eigen::VectorXd::Constant(1, 3.0 * t * t));
  };
  spec.exact_damping = [](double t) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, t > 0.0 ? oracle::rl_monomial(3, 0.5, t, oracle::RlKind::kDerivative) : 0.0);
  };
  return spec;
}

std::vector<std::string> benchmark_names() { return {"coupled-oscillator", "bagley-torvik", "damped-oscillator-1d"}; }

BenchmarkSpec benchmark_by_name(std::string_view name) {
  if (name == "coupled-oscillator") return coupled_oscillator();
  if (name == "bagley-torvik") return bagley_torvik();
  if (name == "damped-oscillator-1d") return damped_oscillator_1d();
  throw Error(ErrorKind::kInvalidArgument, "unknown benchmark '" + std::string(name) + "'");
}

BenchmarkSpec with_derivative_order(BenchmarkSpec spec, double order) {
  if (!(order > 0.0 && order < 2.0)) throw Error(ErrorKind::kInvalidArgument, "derivative order must lie in (0, 2)");
  if (order != spec.problem.damping_order()) {
    spec.problem.alpha = 0.5 * order;
    spec.problem.exact_solution.reset();
    spec.exact_damping.reset();
  }
  return spec;
}

double energy(const LagrangianProblem& prob, const Eigen::VectorXd& x, const Eigen::VectorXd& p, double t) {
  const double kinetic = prob.mass.size() == 0 ? 0.5 * p.squaredNorm() : 0.5 * p.dot(prob.mass.ldlt().solve(p));
  return kinetic + prob.potential(t, x);
}

std::optional<double> exact_solution_residual(const BenchmarkSpec& spec, int samples) {
  const auto& prob = spec.problem;
  if (!prob.exact_solution || !spec.exact_damping) return std::nullopt;
  const auto& exact = *prob.exact_solution;
  const double step = 1e-3;
  const Eigen::MatrixXd m = prob.mass_matrix();
  double worst = 0.0;
  for (int j = 1; j <= samples; ++j) {
    const double t = spec.horizon * j / (samples + 1.0);
    const Eigen::VectorXd pdot = (8.0 * (exact(t + step).second - exact(t - step).second) -
                                  (exact(t + 2.0 * step).second - exact(t - 2.0 * step).second)) /
                                 (12.0 * step);
    const Eigen::VectorXd x = exact(t).first;
    const Eigen::VectorXd res = pdot + prob.grad_potential(t, x) + prob.rho * (*spec.exact_damping)(t);
    worst = std::max(worst, res.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

std::vector<double> relative_energy_error(const BenchmarkSpec& spec, const std::vector<double>& times,
                                          const std::vector<double>& energies) {
  if (times.size() != energies.size()) throw Error(ErrorKind::kShapeMismatch, "times and energies differ in length");
  if (!spec.problem.exact_solution) throw Error(ErrorKind::kInvalidArgument, spec.name + " has no exact solution");
  std::vector<double> exact(times.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto [x, p] = (*spec.problem.exact_solution)(times[k]);
    exact[k] = energy(spec.problem, x, p, times[k]);
    scale = std::max(scale, std::abs(exact[k]));
  }
  std::vector<double> err(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) err[k] = (energies[k] - exact[k]) / scale;
  return err;
}

}  // namespace fvi
