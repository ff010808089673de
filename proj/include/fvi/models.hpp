#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fvi/galerkin.hpp"

namespace fvi {

struct BenchmarkSpec {
  std::string name;
  LagrangianProblem problem;
  Eigen::VectorXd x0;
  Eigen::VectorXd p0;
  double horizon = 1.0;
  std::string reference;
  /// D^(2α) of the exact position, used to check the closed form against the ODE.
  std::optional<std::function<Eigen::VectorXd(double)>> exact_damping;
};

/// ẍᵢ + ρẋᵢ + ηxᵢ = 0 in two uncoupled components, η = 0.5, ρ = 0.25.
BenchmarkSpec coupled_oscillator();

/// ẍ + D^(1/2)x + x = f(t) with exact solution t³.
BenchmarkSpec bagley_torvik();

/// ẍ + 0.25ẋ + x = 0, x(0) = 1, ẋ(0) = 0.5.
BenchmarkSpec damped_oscillator_1d();

/// "coupled-oscillator" | "bagley-torvik" | "damped-oscillator-1d".
BenchmarkSpec benchmark_by_name(std::string_view name);
std::vector<std::string> benchmark_names();

/// Replaces the damping operator order 2α. Drops exact data when the order
/// changes, since the closed forms are only valid for the stock order.
BenchmarkSpec with_derivative_order(BenchmarkSpec spec, double order);

/// H(x, p) = ½pᵀM⁻¹p + U(t, x).
double energy(const LagrangianProblem& prob, const Eigen::VectorXd& x, const Eigen::VectorXd& p, double t = 0.0);

/// max over sample times of |ṗ + ∇U − f + ρ D^(2α)x| along the exact solution,
/// with ṗ from a fourth-order central difference. Returns nullopt without exact data.
std::optional<double> exact_solution_residual(const BenchmarkSpec& spec, int samples = 20);

/// Relative energy error (E_k − E(t_k)) / max_t |E(t)|, max taken over the nodes.
std::vector<double> relative_energy_error(const BenchmarkSpec& spec, const std::vector<double>& times,
                                          const std::vector<double>& energies);

}  // namespace fvi
