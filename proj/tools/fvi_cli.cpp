// fvi: weight export, simulations, convergence sweeps and property checks.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fvi/error.hpp"
#include "fvi/harness.hpp"
#include "fvi/models.hpp"
#include "fvi/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kToleranceViolation = 2;

struct Common {
  std::string method = "lobatto2";
  std::string spec = "coupled-oscillator";
  std::optional<double> horizon;
  std::optional<double> h;
  std::string out_dir = ".";
  double tol = 1e-12;
  std::optional<double> derivative_order;
  double lambda_eps = 1e-16;
  std::size_t oversampling = 4;
  std::string backend = "fft";
};

void add_run_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--method", c.method, "lobatto2 | lobatto3 | lobatto4 | midcq")->capture_default_str();
  cmd->add_option("--spec", c.spec, "coupled-oscillator | bagley-torvik | damped-oscillator-1d")->capture_default_str();
  cmd->add_option("--horizon", c.horizon, "final time T (default: the spec's)");
  cmd->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--tol", c.tol, "Newton residual tolerance")->capture_default_str();
  cmd->add_option("--derivative-order", c.derivative_order, "damping operator order 2*alpha (overrides the spec)");
  cmd->add_option("--lambda-eps", c.lambda_eps, "eps in the contour radius rule")->capture_default_str();
  cmd->add_option("--oversampling", c.oversampling, "contour points per weight index")->capture_default_str();
  cmd->add_option("--contour-backend", c.backend, "serial | parallel | fft")->capture_default_str();
}

fvi::RunOptions options_from(const Common& c) {
  fvi::RunOptions o;
  o.newton_tol = c.tol;
  o.derivative_order = c.derivative_order;
  o.lambda_eps = c.lambda_eps;
  o.oversampling = c.oversampling;
  o.backend = fvi::backend_from_name(c.backend);
  return o;
}

std::size_t steps_for(double horizon, std::optional<std::size_t> steps, std::optional<double> h) {
  if (steps) return *steps;
  if (h) {
    const double n = std::round(horizon / *h);
    if (n < 1 || std::abs(n * *h - horizon) > 1e-9 * horizon) {
      throw fvi::Error(fvi::ErrorKind::kInvalidArgument, "--h must divide the horizon");
    }
    return static_cast<std::size_t>(n);
  }
  throw fvi::Error(fvi::ErrorKind::kInvalidArgument, "give --steps or --h");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional variational integrators with convolution quadrature damping"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  Common c;
  std::optional<std::size_t> steps;
  std::vector<std::size_t> step_list;
  std::optional<std::size_t> fit_min, fit_max;
  bool trim = false;
  double order = 1.0;
  std::optional<double> exponent;
  std::string file = "weights.csv";

  auto* weights = app.add_subcommand("weights", "export convolution weights as CSV");
  weights->add_option("--method", c.method, "lobatto2 | lobatto3 | lobatto4 | midcq")->capture_default_str();
  weights->add_option("--derivative-order", order, "weights of D^order")->capture_default_str();
  weights->add_option("--exponent", exponent, "kernel s^(-exponent); overrides --derivative-order");
  weights->add_option("--h", c.h, "step size")->required();
  weights->add_option("--steps", steps, "last weight index N")->required();
  weights->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
  weights->add_option("--file", file, "file name inside --out-dir")->capture_default_str();
  weights->add_option("--lambda-eps", c.lambda_eps, "eps in the contour radius rule")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "run one integration and write CSV/JSON artifacts");
  add_run_flags(simulate, c);
  simulate->add_option("--steps", steps, "number of steps N");
  simulate->add_option("--h", c.h, "step size (alternative to --steps)");

  auto* converge = app.add_subcommand("converge", "error sweep over step counts with fitted slopes");
  add_run_flags(converge, c);
  converge->add_option("--steps", step_list, "step counts, e.g. 32,64,128")->delimiter(',')->required();
  converge->add_option("--fit-min", fit_min, "smallest N used in the slope fit");
  converge->add_option("--fit-max", fit_max, "largest N used in the slope fit");
  converge->add_flag("--trim-plateau", trim, "drop trailing points where the error has levelled off");

  auto* verify = app.add_subcommand("verify", "run the property checks");
  verify->add_option("--tol", c.tol, "Newton residual tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kRuntimeError;
  }

  try {
    if (*weights) {
      const auto method = fvi::method_from_name(c.method);
      const double e = exponent.value_or(-order);
      const auto path = std::filesystem::path(c.out_dir) / file;
      const auto w = fvi::export_weights(method, e, *c.h, *steps, path, c.lambda_eps);
      std::printf("wrote %s (%zu matrices of size %d, lambda = %.6g, max imag residue = %.3g)\n", path.c_str(),
                  w.count(), w.stages(), w.radius(), w.max_imag_residue());
      return kOk;
    }

    if (*simulate) {
      const auto spec = fvi::benchmark_by_name(c.spec);
      const double horizon = c.horizon.value_or(spec.horizon);
      const std::size_t n = steps_for(horizon, steps, c.h);
      const auto art = fvi::simulate(spec, fvi::method_from_name(c.method), n, horizon, c.out_dir, options_from(c));
      std::printf("trajectory: %s\nenergy:     %s\nmanifest:   %s\n", art.trajectory_csv.c_str(),
                  art.energy_csv.c_str(), art.manifest_json.c_str());
      if (art.max_error_x) std::printf("max |x_k - x(t_k)| = %.6e\n", *art.max_error_x);
      if (art.max_relative_energy_error) std::printf("max |E_err| = %.6e\n", *art.max_relative_energy_error);
      return kOk;
    }

    if (*converge) {
      const auto spec = fvi::benchmark_by_name(c.spec);
      const double horizon = c.horizon.value_or(spec.horizon);
      const auto method = fvi::method_from_name(c.method);
      fvi::FitWindow window{fit_min, fit_max, trim};
      const auto report = fvi::converge(spec, method, step_list, horizon, options_from(c), window);
      std::printf("%8s %14s %14s %14s\n", "N", "h", "err_x", "err_p");
      for (std::size_t i = 0; i < report.steps.size(); ++i) {
        std::printf("%8zu %14.6e %14.6e", report.steps[i], report.h[i], report.err_x[i]);
        if (report.err_p) {
          std::printf(" %14.6e\n", (*report.err_p)[i]);
        } else {
          std::printf(" %14s\n", "-");
        }
      }
      std::printf("slope_x = %.3f (%zu points)", report.fit_x.slope, report.fit_x.used.size());
      if (report.fit_p) std::printf(", slope_p = %.3f", report.fit_p->slope);
      std::printf("\n");
      const auto path = std::filesystem::path(c.out_dir) /
                        (report.spec + "_" + report.method + "_convergence.csv");
      fvi::write_convergence_csv(report, path);
      std::printf("wrote %s\n", path.c_str());
      return kOk;
    }

    if (*verify) {
      int failed = 0;
      for (const auto& r : fvi::run_property_suite(c.tol)) {
        std::printf("%s  %-62s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        failed += r.passed ? 0 : 1;
      }
      return failed == 0 ? kOk : kToleranceViolation;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}
