#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fvi/cq.hpp"
#include "fvi/models.hpp"
#include "fvi/stepper.hpp"

namespace fvi {

enum class Method { kLobatto2, kLobatto3, kLobatto4, kMidcq };

Method method_from_name(std::string_view name);
std::string method_name(Method m);
/// Tableau used by a method (midpoint for MIDCQ).
ButcherTableau method_tableau(Method m);

struct RunOptions {
  double newton_tol = 1e-12;
  /// Overrides the damping order 2α of the spec.
  std::optional<double> derivative_order;
  double lambda_eps = 1e-16;
  std::size_t oversampling = 4;
  ContourBackend backend = ContourBackend::kFft;
  /// Report a momentum error for MIDCQ from its discrete Legendre momenta.
  bool midcq_momentum = false;
};

/// Applies the derivative-order override, if any.
BenchmarkSpec resolve_spec(const BenchmarkSpec& spec, const RunOptions& options);

FviSolution run_method(const BenchmarkSpec& spec, Method method, std::size_t steps, double horizon,
                       const RunOptions& options = {});

struct FitWindow {
  std::optional<std::size_t> min_steps;
  std::optional<std::size_t> max_steps;
  /// Also drop the finest points while their local rate stays below
  /// plateau_rate (the error has levelled off above the floor guard).
  bool trim_plateau = false;
  double plateau_rate = 1.0;
};

struct SlopeFit {
  double slope = 0.0;
  std::vector<std::size_t> used;
  std::vector<std::size_t> excluded;
};

/// Least squares on log₂ err vs log₂ h over the window, skipping errors below
/// `floor` (rounding-dominated). Needs at least two usable points.
SlopeFit fit_slope(const std::vector<std::size_t>& steps, const std::vector<double>& h,
                   const std::vector<double>& err, double floor, const FitWindow& window = {});

struct ConvergenceReport {
  std::string method;
  std::string spec;
  std::vector<std::size_t> steps;
  std::vector<double> h;
  std::vector<double> err_x;
  std::optional<std::vector<double>> err_p;
  double floor = 0.0;
  SlopeFit fit_x;
  std::optional<SlopeFit> fit_p;
};

/// Max-node errors of `method` on `spec` for every step count, computed
/// concurrently, plus fitted slopes. Needs ≥ 3 step counts, strictly increasing.
ConvergenceReport converge(const BenchmarkSpec& spec, Method method, const std::vector<std::size_t>& steps,
                           double horizon, const RunOptions& options = {}, const FitWindow& window = {});

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path);

struct SimulationArtifacts {
  std::filesystem::path trajectory_csv;
  std::filesystem::path energy_csv;
  std::filesystem::path manifest_json;
  std::optional<double> max_error_x;
  std::optional<double> max_relative_energy_error;
};

/// Writes trajectory (t, x…, p…), energy (t, E_k, E_exact, E_err) and a JSON
/// manifest into out_dir.
SimulationArtifacts simulate(const BenchmarkSpec& spec, Method method, std::size_t steps, double horizon,
                             const std::filesystem::path& out_dir, const RunOptions& options = {});

/// CSV with a `#` comment line (method, exponent, h, N, λ, ε, residue) and
/// columns n,row,col,value in 17-significant-digit format.
void write_weights_csv(const WeightSequence& w, const std::filesystem::path& path);

WeightSequence export_weights(Method method, double exponent, double h, std::size_t n_max,
                              const std::filesystem::path& path, double lambda_eps = 1e-16);

struct WeightsCsv {
  std::string header;
  std::vector<Eigen::MatrixXd> w;
};

WeightsCsv read_weights_csv(const std::filesystem::path& path);

}  // namespace fvi
