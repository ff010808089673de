#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fvi/tableau.hpp"

namespace fvi {

/// How the trapezoidal contour sum is evaluated. Serial and Parallel run the
/// same direct kernel with the same per-entry summation order and are
/// bit-identical. Fft rounds the point count up to a power of two and uses an
/// inverse FFT per matrix entry; it is not bit-identical to the direct sum.
enum class ContourBackend { kSerial, kParallel, kFft };

std::string backend_name(ContourBackend b);
ContourBackend backend_from_name(std::string_view name);

struct ContourOptions {
  /// ε in the default radius λ = ε^(1/(M+N)); M = N+1 gives ε^(1/(2N+1)).
  double eps = 1e-16;
  /// Explicit radius, overriding the ε rule.
  std::optional<double> radius;
  /// Contour points M = oversampling·(N+1) (rounded up to a power of two for
  /// the FFT backend). Values > 1 push both aliasing and the λ⁻ⁿ rounding
  /// amplification well below √ε.
  std::size_t oversampling = 1;
  ContourBackend backend = ContourBackend::kParallel;
  /// Eigenvector-matrix condition number above which a contour point counts as
  /// degenerate.
  double max_condition = 1e12;
};

/// Convolution weights W₀..W_N (r×r each) of K(s) = s^(−exponent) for a given
/// tableau and step. Negative exponent: derivative of order |exponent|.
class WeightSequence {
 public:
  WeightSequence(double exponent, double h, std::string tableau_label, std::vector<Eigen::MatrixXd> w,
                 double radius, double eps, std::size_t contour_points, double max_imag_residue);

  double exponent() const { return exponent_; }
  double h() const { return h_; }
  const std::string& tableau_label() const { return tableau_label_; }
  double radius() const { return radius_; }
  double eps() const { return eps_; }
  std::size_t contour_points() const { return contour_points_; }
  double max_imag_residue() const { return max_imag_residue_; }

  /// N+1.
  std::size_t count() const { return w_.size(); }
  std::size_t last_index() const { return w_.size() - 1; }
  int stages() const { return w_.empty() ? 0 : static_cast<int>(w_.front().rows()); }
  const Eigen::MatrixXd& operator[](std::size_t n) const { return w_[n]; }
  const std::vector<Eigen::MatrixXd>& matrices() const { return w_; }

  /// max_n ‖W_n‖_∞ (entrywise max).
  double max_norm() const;

 private:
  double exponent_;
  double h_;
  std::string tableau_label_;
  std::vector<Eigen::MatrixXd> w_;
  double radius_;
  double eps_;
  std::size_t contour_points_;
  double max_imag_residue_;
};

/// Scalar weights w₀..w_N (MIDCQ or Grünwald–Letnikov).
struct ScalarWeightSequence {
  double exponent = 0.0;
  double h = 1.0;
  std::vector<double> w;

  std::size_t count() const { return w.size(); }
  double operator[](std::size_t n) const { return w[n]; }
};

/// Stage values of a discrete curve: block k is an r×d matrix whose row i is
/// the value at t_k + c_i h. With the continuity flag set, the last row of
/// block k−1 must equal the first row of block k exactly; append() enforces it.
class StageTrajectory {
 public:
  StageTrajectory(int dim, int stages, double h, bool continuity);

  int dim() const { return dim_; }
  int stages() const { return stages_; }
  double h() const { return h_; }
  bool continuity() const { return continuity_; }
  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }

  const Eigen::MatrixXd& block(std::size_t k) const;
  const Eigen::MatrixXd& operator[](std::size_t k) const { return blocks_[k]; }
  const Eigen::MatrixXd& back() const { return blocks_.back(); }

  void append(Eigen::MatrixXd block);

 private:
  int dim_;
  int stages_;
  double h_;
  bool continuity_;
  std::vector<Eigen::MatrixXd> blocks_;
};

/// Contour-quadrature weights (trapezoidal rule on |z| = λ with M points, one
/// complex eigendecomposition of γ(z_ℓ)/h per point). A degenerate contour point
/// triggers one retry at 0.98·λ before throwing kContourDegeneracy.
WeightSequence compute_weights(const ButcherTableau& tab, double exponent, double h, std::size_t n_max,
                               const ContourOptions& options = {});

/// Σ_{n=0}^{k} W_{k−n} f_n.
Eigen::MatrixXd apply_retarded(const WeightSequence& w, const StageTrajectory& f, std::size_t k);

/// History part Σ_{n=1}^{k} W_n f_{k−n}; only blocks 0..k−1 of f are read.
Eigen::MatrixXd retarded_history(const WeightSequence& w, const StageTrajectory& f, std::size_t k);

/// Σ_{n=0}^{N−k} W_nᵀ g_{k+n}, with N = g.size() − 1.
Eigen::MatrixXd apply_advanced(const WeightSequence& w, const StageTrajectory& g, std::size_t k);

/// Taylor coefficients of ((2/h)(1−z)/(1+z))^(−exponent) by binomial series
/// and Cauchy product.
ScalarWeightSequence midcq_weights(double exponent, double h, std::size_t n_max);

/// Σ_{j=0}^{k} w_{k−j} (f_j + f_{j+1})/2.
Eigen::VectorXd apply_midcq(const ScalarWeightSequence& w, std::span<const Eigen::VectorXd> nodes,
                            std::size_t k);

}  // namespace fvi
