#include "fvi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "fvi/error.hpp"
#include "fvi/weight_cache.hpp"
#include "json.hpp"

namespace fvi {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace

Method method_from_name(std::string_view name) {
  if (name == "lobatto2") return Method::kLobatto2;
  if (name == "lobatto3") return Method::kLobatto3;
  if (name == "lobatto4") return Method::kLobatto4;
  if (name == "midcq") return Method::kMidcq;
  throw Error(ErrorKind::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kLobatto2: return "lobatto2";
    case Method::kLobatto3: return "lobatto3";
    case Method::kLobatto4: return "lobatto4";
    case Method::kMidcq: return "midcq";
  }
  return "unknown";
}

ButcherTableau method_tableau(Method m) {
  switch (m) {
    case Method::kLobatto2: return lobatto_iiic(2);
    case Method::kLobatto3: return lobatto_iiic(3);
    case Method::kLobatto4: return lobatto_iiic(4);
    case Method::kMidcq: return midpoint();
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method");
}

BenchmarkSpec resolve_spec(const BenchmarkSpec& spec, const RunOptions& options) {
  return options.derivative_order ? with_derivative_order(spec, *options.derivative_order) : spec;
}

FviSolution run_method(const BenchmarkSpec& spec, Method method, std::size_t steps, double horizon,
                       const RunOptions& options) {
  if (!(horizon > 0.0)) throw Error(ErrorKind::kInvalidArgument, "horizon must be positive");
  const BenchmarkSpec resolved = resolve_spec(spec, options);
  FviConfig cfg;
  cfg.h = horizon / static_cast<double>(steps);
  cfg.steps = steps;
  cfg.newton_tol = options.newton_tol;
  cfg.contour.eps = options.lambda_eps;
  cfg.contour.oversampling = options.oversampling;
  cfg.contour.backend = options.backend;

  FviSolution sol = method == Method::kMidcq
                        ? run_midcq(resolved.problem, cfg, resolved.x0, resolved.p0)
                        : run(resolved.problem, method_tableau(method), cfg, resolved.x0, resolved.p0);
  std::vector<double> e(sol.times.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = energy(resolved.problem, sol.positions[k], sol.momenta[k], sol.times[k]);
  sol.energy = std::move(e);
  return sol;
}

SlopeFit fit_slope(const std::vector<std::size_t>& steps, const std::vector<double>& h,
                   const std::vector<double>& err, double floor, const FitWindow& window) {
  if (steps.size() != h.size() || h.size() != err.size()) throw Error(ErrorKind::kShapeMismatch, "fit inputs differ");
  SlopeFit fit;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const bool in_window = (!window.min_steps || steps[i] >= *window.min_steps) &&
                           (!window.max_steps || steps[i] <= *window.max_steps);
    if (!in_window) continue;
    (std::isfinite(err[i]) && err[i] > floor ? fit.used : fit.excluded).push_back(i);
  }
  if (window.trim_plateau) {
    // Drop the finest points while they stop improving: the error has hit the
    // rounding level of the whole pipeline, not just the floor guard.
    while (fit.used.size() > 2) {
      const std::size_t a = fit.used[fit.used.size() - 2];
      const std::size_t b = fit.used.back();
      const double rate = std::log2(err[a] / err[b]) / std::log2(h[a] / h[b]);
      if (rate >= window.plateau_rate) break;
      fit.excluded.push_back(b);
      fit.used.pop_back();
    }
  }
  std::sort(fit.excluded.begin(), fit.excluded.end());
  if (fit.used.size() < 2) throw Error(ErrorKind::kInvalidArgument, "fewer than two points above the error floor");
  std::vector<double> xs, ys;
  for (auto i : fit.used) {
    xs.push_back(std::log2(h[i]));
    ys.push_back(std::log2(err[i]));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

ConvergenceReport converge(const BenchmarkSpec& spec, Method method, const std::vector<std::size_t>& steps,
                           double horizon, const RunOptions& options, const FitWindow& window) {
  if (steps.size() < 3) throw Error(ErrorKind::kInvalidArgument, "a convergence sweep needs at least three runs");
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) throw Error(ErrorKind::kInvalidArgument, "step counts must increase strictly");
  }
  const BenchmarkSpec resolved = resolve_spec(spec, options);
  if (!resolved.problem.exact_solution) {
    throw Error(ErrorKind::kInvalidArgument, resolved.name + " has no exact solution at this derivative order");
  }
  const auto& exact = *resolved.problem.exact_solution;
  const bool with_p = method != Method::kMidcq || options.midcq_momentum;

  ConvergenceReport report;
  report.method = method_name(method);
  report.spec = resolved.name;
  report.steps = steps;
  const std::size_t cases = steps.size();
  report.h.resize(cases);
  report.err_x.assign(cases, 0.0);
  std::vector<double> err_p(cases, 0.0);
  std::vector<double> scale_x(cases, 0.0), scale_p(cases, 0.0);
  std::vector<std::exception_ptr> failures(cases);

#pragma omp parallel for schedule(dynamic, 1)
  for (long long ci = static_cast<long long>(cases) - 1; ci >= 0; --ci) {
    const auto i = static_cast<std::size_t>(ci);
    try {
      report.h[i] = horizon / static_cast<double>(steps[i]);
      const FviSolution sol = run_method(resolved, method, steps[i], horizon, options);
      for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const auto [x, p] = exact(sol.times[k]);
        report.err_x[i] = std::max(report.err_x[i], max_abs_diff(sol.positions[k], x));
        err_p[i] = std::max(err_p[i], max_abs_diff(sol.momenta[k], p));
        scale_x[i] = std::max(scale_x[i], x.lpNorm<Eigen::Infinity>());
        scale_p[i] = std::max(scale_p[i], p.lpNorm<Eigen::Infinity>());
      }
    } catch (const std::exception& e) {
      const auto kind = dynamic_cast<const Error*>(&e) ? dynamic_cast<const Error&>(e).kind() : ErrorKind::kInvalidArgument;
      failures[i] = std::make_exception_ptr(Error(kind, "run with N = " + std::to_string(steps[i]) + " (" + e.what() + ")"));
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const double eps = std::numeric_limits<double>::epsilon();
  report.floor = 100.0 * eps * *std::max_element(scale_x.begin(), scale_x.end());
  report.fit_x = fit_slope(steps, report.h, report.err_x, report.floor, window);
  if (with_p) {
    const double floor_p = 100.0 * eps * *std::max_element(scale_p.begin(), scale_p.end());
    report.fit_p = fit_slope(steps, report.h, err_p, floor_p, window);
    report.err_p = std::move(err_p);
  }
  return report;
}

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# method=" << report.method << " spec=" << report.spec << " norm=max-over-nodes-and-components"
      << " floor=" << fmt17(report.floor) << " slope_x=" << fmt17(report.fit_x.slope);
  if (report.fit_p) out << " slope_p=" << fmt17(report.fit_p->slope);
  out << "\nN,h,err_x,err_p,used_x\n";
  for (std::size_t i = 0; i < report.steps.size(); ++i) {
    const bool used = std::find(report.fit_x.used.begin(), report.fit_x.used.end(), i) != report.fit_x.used.end();
    out << report.steps[i] << ',' << fmt17(report.h[i]) << ',' << fmt17(report.err_x[i]) << ','
        << (report.err_p ? fmt17((*report.err_p)[i]) : std::string("nan")) << ',' << (used ? 1 : 0) << '\n';
  }
  close_out(out, path);
}

SimulationArtifacts simulate(const BenchmarkSpec& spec, Method method, std::size_t steps, double horizon,
                             const std::filesystem::path& out_dir, const RunOptions& options) {
  const BenchmarkSpec resolved = resolve_spec(spec, options);
  const FviSolution sol = run_method(resolved, method, steps, horizon, options);
  const int d = resolved.problem.dim;
  const auto& energies = *sol.energy;

  SimulationArtifacts art;
  const std::string stem = resolved.name + "_" + method_name(method) + "_N" + std::to_string(steps);
  art.trajectory_csv = out_dir / (stem + "_trajectory.csv");
  art.energy_csv = out_dir / (stem + "_energy.csv");
  art.manifest_json = out_dir / (stem + "_manifest.json");

  std::optional<std::vector<double>> e_err;
  std::vector<double> e_exact(sol.times.size(), std::numeric_limits<double>::quiet_NaN());
  if (resolved.problem.exact_solution) {
    e_err = relative_energy_error(resolved, sol.times, energies);
    double max_err = 0.0, max_e = 0.0;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      const auto [x, p] = (*resolved.problem.exact_solution)(sol.times[k]);
      e_exact[k] = energy(resolved.problem, x, p, sol.times[k]);
      max_err = std::max(max_err, max_abs_diff(sol.positions[k], x));
      max_e = std::max(max_e, std::abs((*e_err)[k]));
    }
    art.max_error_x = max_err;
    art.max_relative_energy_error = max_e;
  }

  {
    auto out = open_out(art.trajectory_csv);
    out << "# spec=" << resolved.name << " method=" << method_name(method) << " N=" << steps
        << " h=" << fmt17(horizon / static_cast<double>(steps)) << "\nt";
    for (int i = 0; i < d; ++i) out << ",x" << i + 1;
    for (int i = 0; i < d; ++i) out << ",p" << i + 1;
    out << '\n';
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      out << fmt17(sol.times[k]);
      for (int i = 0; i < d; ++i) out << ',' << fmt17(sol.positions[k](i));
      for (int i = 0; i < d; ++i) out << ',' << fmt17(sol.momenta[k](i));
      out << '\n';
    }
    close_out(out, art.trajectory_csv);
  }
  {
    auto out = open_out(art.energy_csv);
    out << "# E_err = (E_k - E(t_k)) / max_k |E(t_k)|\nt,E,E_exact,E_err\n";
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      out << fmt17(sol.times[k]) << ',' << fmt17(energies[k]) << ',' << fmt17(e_exact[k]) << ','
          << (e_err ? fmt17((*e_err)[k]) : std::string("nan")) << '\n';
    }
    close_out(out, art.energy_csv);
  }
  {
    nlohmann::json m;
    m["spec"] = resolved.name;
    m["reference"] = resolved.reference;
    m["method"] = method_name(method);
    m["steps"] = steps;
    m["horizon"] = horizon;
    m["h"] = horizon / static_cast<double>(steps);
    m["rho"] = resolved.problem.rho;
    m["derivative_order"] = resolved.problem.damping_order();
    m["newton_tol"] = options.newton_tol;
    m["lambda_eps"] = options.lambda_eps;
    m["contour_oversampling"] = options.oversampling;
    m["contour_backend"] = backend_name(options.backend);
    m["x0"] = std::vector<double>(resolved.x0.data(), resolved.x0.data() + d);
    m["p0"] = std::vector<double>(resolved.p0.data(), resolved.p0.data() + d);
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(sol.weights_fingerprint));
    m["weights_fingerprint"] = hex;
    m["error_norm"] = "max over main nodes and components";
    std::vector<int> iterations;
    double worst = 0.0;
    for (const auto& s : sol.newton_stats) {
      iterations.push_back(s.iterations);
      worst = std::max(worst, s.residual);
    }
    m["newton"] = {{"iterations", iterations},
                   {"max_iterations", iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end())},
                   {"max_residual", worst}};
    if (art.max_error_x) m["max_error_x"] = *art.max_error_x;
    if (art.max_relative_energy_error) m["max_relative_energy_error"] = *art.max_relative_energy_error;
    m["files"] = {art.trajectory_csv.filename().string(), art.energy_csv.filename().string()};
    auto out = open_out(art.manifest_json);
    out << m.dump(2) << '\n';
    close_out(out, art.manifest_json);
  }
  return art;
}

void write_weights_csv(const WeightSequence& w, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# method=" << w.tableau_label() << " exponent=" << fmt17(w.exponent()) << " h=" << fmt17(w.h())
      << " N=" << w.last_index() << " lambda=" << fmt17(w.radius()) << " eps=" << fmt17(w.eps())
      << " contour_points=" << w.contour_points() << " max_imag_residue=" << fmt17(w.max_imag_residue())
      << "\nn,row,col,value\n";
  for (std::size_t n = 0; n < w.count(); ++n) {
    for (Eigen::Index i = 0; i < w[n].rows(); ++i) {
      for (Eigen::Index j = 0; j < w[n].cols(); ++j) {
        out << n << ',' << i << ',' << j << ',' << fmt17(w[n](i, j)) << '\n';
      }
    }
  }
  close_out(out, path);
}

WeightSequence export_weights(Method method, double exponent, double h, std::size_t n_max,
                              const std::filesystem::path& path, double lambda_eps) {
  if (method == Method::kMidcq) {
    const auto s = midcq_weights(exponent, h, n_max);
    std::vector<Eigen::MatrixXd> w;
    for (double v : s.w) w.push_back(Eigen::MatrixXd::Constant(1, 1, v));
    WeightSequence seq(exponent, h, "midcq", std::move(w), 0.0, 0.0, 0, 0.0);
    write_weights_csv(seq, path);
    return seq;
  }
  ContourOptions options;
  options.eps = lambda_eps;
  auto seq = compute_weights(method_tableau(method), exponent, h, n_max, options);
  write_weights_csv(seq, path);
  return seq;
}

WeightsCsv read_weights_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  WeightsCsv out;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw Error(ErrorKind::kIo, path.string() + ": missing '#' header line");
  }
  out.header = line.substr(2);
  if (!std::getline(in, line) || line != "n,row,col,value") {
    throw Error(ErrorKind::kIo, path.string() + ": missing column header");
  }
  struct Entry {
    std::size_t n;
    Eigen::Index i, j;
    double v;
  };
  std::vector<Entry> entries;
  std::size_t count = 0;
  Eigen::Index dim = 0;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Entry e{};
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> e.n >> c1 >> e.i >> c2 >> e.j >> c3) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw Error(ErrorKind::kIo, path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    std::string value;
    ss >> value;
    try {
      e.v = std::stod(value);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kIo, path.string() + ":" + std::to_string(lineno) + ": bad value '" + value + "'");
    }
    count = std::max(count, e.n + 1);
    dim = std::max({dim, e.i + 1, e.j + 1});
    entries.push_back(e);
  }
  out.w.assign(count, Eigen::MatrixXd::Zero(dim, dim));
  for (const auto& e : entries) out.w[e.n](e.i, e.j) = e.v;
  return out;
}

}  // namespace fvi
