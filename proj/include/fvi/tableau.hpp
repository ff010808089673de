#pragma once

#include <complex>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace fvi {

/// Implicit Runge–Kutta coefficients (A, b, c) with classical order p and
/// stage order q. Immutable; A⁻¹ is computed once at construction because
/// every contour point of the CQ weight computation needs it.
class ButcherTableau {
 public:
  ButcherTableau(std::string label, Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c,
                 int order, int stage_order);

  const std::string& label() const { return label_; }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& c() const { return c_; }
  const Eigen::MatrixXd& a_inverse() const { return a_inv_; }
  int order() const { return order_; }
  int stage_order() const { return stage_order_; }
  int stages() const { return static_cast<int>(b_.size()); }

  /// c₁ = 0 and c_r = 1: the main nodes are stages.
  bool has_endpoint_stages() const;

 private:
  std::string label_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd c_;
  Eigen::MatrixXd a_inv_;
  int order_;
  int stage_order_;
};

/// Lobatto IIIC with r ∈ {2, 3, 4} stages (order 2r−2, stage order r−1).
ButcherTableau lobatto_iiic(int r);

/// One-stage implicit midpoint rule.
ButcherTableau midpoint();

/// "lobatto2" | "lobatto3" | "lobatto4" | "midpoint" (also accepts "midcq").
ButcherTableau tableau_by_name(std::string_view name);

/// R(z) = 1 + z bᵀ(I − zA)⁻¹𝟙. Throws kStabilityPole when I − zA is singular.
std::complex<double> stability(const ButcherTableau& tab, std::complex<double> z);

/// CQ generating matrix γ(z) = A⁻¹ − z A⁻¹𝟙 bᵀA⁻¹.
Eigen::MatrixXcd gamma(const ButcherTableau& tab, std::complex<double> z);

}  // namespace fvi
