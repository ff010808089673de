#include "fvi/cq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fvi/contour_kernels.hpp"
#include "fvi/error.hpp"

namespace fvi {

WeightSequence::WeightSequence(double exponent, double h, std::string tableau_label, std::vector<Eigen::MatrixXd> w,
                               double radius, double eps, std::size_t contour_points, double max_imag_residue)
    : exponent_(exponent),
      h_(h),
      tableau_label_(std::move(tableau_label)),
      w_(std::move(w)),
      radius_(radius),
      eps_(eps),
      contour_points_(contour_points),
      max_imag_residue_(max_imag_residue) {}

double WeightSequence::max_norm() const {
  double m = 0.0;
  for (const auto& wn : w_) m = std::max(m, wn.cwiseAbs().maxCoeff());
  return m;
}

StageTrajectory::StageTrajectory(int dim, int stages, double h, bool continuity)
    : dim_(dim), stages_(stages), h_(h), continuity_(continuity) {
  if (dim < 1 || stages < 1) throw Error(ErrorKind::kInvalidArgument, "trajectory needs dim, stages >= 1");
}

const Eigen::MatrixXd& StageTrajectory::block(std::size_t k) const {
  if (k >= blocks_.size()) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "block " + std::to_string(k) + " of " + std::to_string(blocks_.size()));
  }
  return blocks_[k];
}

void StageTrajectory::append(Eigen::MatrixXd block) {
  if (block.rows() != stages_ || block.cols() != dim_) {
    throw Error(ErrorKind::kShapeMismatch, "block is " + std::to_string(block.rows()) + "x" +
                                               std::to_string(block.cols()) + ", expected " +
                                               std::to_string(stages_) + "x" + std::to_string(dim_));
  }
  if (continuity_ && !blocks_.empty() && block.row(0) != blocks_.back().row(stages_ - 1)) {
    throw Error(ErrorKind::kInvalidArgument, "continuity violated at block " + std::to_string(blocks_.size()));
  }
  blocks_.push_back(std::move(block));
}

std::string backend_name(ContourBackend b) {
  switch (b) {
    case ContourBackend::kSerial: return "serial";
    case ContourBackend::kParallel: return "parallel";
    case ContourBackend::kFft: return "fft";
  }
  return "unknown";
}

ContourBackend backend_from_name(std::string_view name) {
  if (name == "serial") return ContourBackend::kSerial;
  if (name == "parallel") return ContourBackend::kParallel;
  if (name == "fft") return ContourBackend::kFft;
  throw Error(ErrorKind::kInvalidArgument, "unknown contour backend '" + std::string(name) + "'");
}

namespace {

void check_stages(const WeightSequence& w, const StageTrajectory& f) {
  if (w.stages() != f.stages()) {
    throw Error(ErrorKind::kShapeMismatch, "weights have " + std::to_string(w.stages()) +
                                               " stages, trajectory has " + std::to_string(f.stages()));
  }
}

void check_index(std::size_t k, std::size_t limit, const char* what) {
  if (k > limit) {
    throw Error(ErrorKind::kIndexOutOfRange,
                std::string(what) + " index " + std::to_string(k) + " exceeds " + std::to_string(limit));
  }
}

}  // namespace

WeightSequence compute_weights(const ButcherTableau& tab, double exponent, double h, std::size_t n_max,
                               const ContourOptions& options) {
  if (!(h > 0.0)) throw Error(ErrorKind::kInvalidArgument, "step size must be positive");
  if (options.oversampling < 1) throw Error(ErrorKind::kInvalidArgument, "oversampling must be >= 1");
  if (!(options.eps > 0.0 && options.eps < 1.0)) throw Error(ErrorKind::kInvalidArgument, "eps must lie in (0, 1)");

  const int r = tab.stages();
  const bool fft = options.backend == ContourBackend::kFft;
  std::size_t points = options.oversampling * (n_max + 1);
  if (fft) points = std::bit_ceil(points);
  double radius = options.radius.value_or(
      std::pow(options.eps, 1.0 / static_cast<double>(points + n_max)));
  if (!(radius > 0.0 && radius < 1.0)) throw Error(ErrorKind::kInvalidArgument, "contour radius must lie in (0, 1)");

  if (exponent == 0.0) {
    std::vector<Eigen::MatrixXd> w(n_max + 1, Eigen::MatrixXd::Zero(r, r));
    w[0].setIdentity();
    return WeightSequence(exponent, h, tab.label(), std::move(w), radius, options.eps, points, 0.0);
  }

  const bool parallel = options.backend != ContourBackend::kSerial;
  auto sample = [&](double rad) {
    return parallel ? kernels::sample_contour_parallel(tab, exponent, h, rad, points, options.max_condition)
                    : kernels::sample_contour_serial(tab, exponent, h, rad, points, options.max_condition);
  };

  auto samples = sample(radius);
  if (samples.degenerate_at) {
    radius *= 0.98;
    samples = sample(radius);
    if (samples.degenerate_at) {
      throw Error(ErrorKind::kContourDegeneracy,
                  "eigendecomposition failed at contour point l = " + std::to_string(*samples.degenerate_at));
    }
  }

  const auto complex_w = fft        ? kernels::contour_sum_fft(samples.values, radius, n_max)
                         : parallel ? kernels::contour_sum_parallel(samples.values, radius, n_max)
                                    : kernels::contour_sum_serial(samples.values, radius, n_max);
  std::vector<Eigen::MatrixXd> w;
  w.reserve(complex_w.size());
  double residue = 0.0;
  for (const auto& cw : complex_w) {
    residue = std::max(residue, cw.imag().cwiseAbs().maxCoeff());
    w.push_back(cw.real());
  }
  return WeightSequence(exponent, h, tab.label(), std::move(w), radius, options.eps, points, residue);
}

Eigen::MatrixXd apply_retarded(const WeightSequence& w, const StageTrajectory& f, std::size_t k) {
  check_stages(w, f);
  if (f.empty()) throw Error(ErrorKind::kIndexOutOfRange, "empty trajectory");
  check_index(k, std::min(w.last_index(), f.size() - 1), "retarded");
  Eigen::MatrixXd out = w[0] * f[k];
  for (std::size_t n = 0; n < k; ++n) out.noalias() += w[k - n] * f[n];
  return out;
}

Eigen::MatrixXd retarded_history(const WeightSequence& w, const StageTrajectory& f, std::size_t k) {
  check_stages(w, f);
  check_index(k, w.last_index(), "history");
  if (f.size() < k) {
    throw Error(ErrorKind::kHistoryIncomplete,
                "history needs " + std::to_string(k) + " blocks, have " + std::to_string(f.size()));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.stages(), f.dim());
  for (std::size_t n = 0; n < k; ++n) out.noalias() += w[k - n] * f[n];
  return out;
}

Eigen::MatrixXd apply_advanced(const WeightSequence& w, const StageTrajectory& g, std::size_t k) {
  check_stages(w, g);
  if (g.empty()) throw Error(ErrorKind::kIndexOutOfRange, "empty trajectory");
  const std::size_t n_last = g.size() - 1;
  check_index(n_last, w.last_index(), "advanced horizon");
  check_index(k, n_last, "advanced");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.stages(), g.dim());
  for (std::size_t n = 0; n + k <= n_last; ++n) out.noalias() += w[n].transpose() * g[k + n];
  return out;
}

ScalarWeightSequence midcq_weights(double exponent, double h, std::size_t n_max) {
  if (!(h > 0.0)) throw Error(ErrorKind::kInvalidArgument, "step size must be positive");
  const double beta = -exponent;
  std::vector<double> a(n_max + 1), b(n_max + 1);
  a[0] = b[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double dn = static_cast<double>(n);
    a[n] = a[n - 1] * (dn - 1.0 - beta) / dn;   // (1 − z)^β
    b[n] = b[n - 1] * (-beta - dn + 1.0) / dn;  // (1 + z)^(−β)
  }
  const double scale = std::pow(2.0 / h, beta);
  ScalarWeightSequence out{exponent, h, std::vector<double>(n_max + 1, 0.0)};
  for (std::size_t n = 0; n <= n_max; ++n) {
    double s = 0.0;
    for (std::size_t m = 0; m <= n; ++m) s += a[m] * b[n - m];
    out.w[n] = scale * s;
  }
  return out;
}

Eigen::VectorXd apply_midcq(const ScalarWeightSequence& w, std::span<const Eigen::VectorXd> nodes, std::size_t k) {
  check_index(k, w.count() - 1, "midcq");
  if (nodes.size() < k + 2) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "midcq needs " + std::to_string(k + 2) + " nodes, have " + std::to_string(nodes.size()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nodes[0].size());
  for (std::size_t j = 0; j <= k; ++j) out += w[k - j] * 0.5 * (nodes[j] + nodes[j + 1]);
  return out;
}

}  // namespace fvi
