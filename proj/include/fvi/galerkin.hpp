#pragma once

#include <functional>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "fvi/tableau.hpp"

namespace fvi {

/// Lagrange polynomials on control points d_0..d_s, tabulated at the
/// quadrature abscissae: eval(ν, i) = ℓ_ν(c_i), deriv(ν, i) = ℓ'_ν(c_i).
struct LagrangeBasis {
  Eigen::VectorXd nodes;
  Eigen::MatrixXd eval;
  Eigen::MatrixXd deriv;

  int control_points() const { return static_cast<int>(nodes.size()); }
  int quadrature_points() const { return static_cast<int>(eval.cols()); }
};

/// Basis on arbitrary distinct control points evaluated at `abscissae`.
LagrangeBasis lagrange_basis(const Eigen::VectorXd& nodes, const Eigen::VectorXd& abscissae);

/// Control points = tableau abscissae when they include both endpoints
/// (Lobatto); the one-stage midpoint rule gets the linear basis on {0, 1}.
LagrangeBasis basis_for(const ButcherTableau& tab);

/// Mechanical Lagrangian L(t, x, v) = ½vᵀMv − U(t, x). Forcing enters through
/// the time dependence of U, so grad_potential returns ∇U(x) − f(t).
struct LagrangianProblem {
  using VectorField = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
  using ScalarField = std::function<double(double, const Eigen::VectorXd&)>;
  using MatrixField = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;
  using ExactSolution = std::function<std::pair<Eigen::VectorXd, Eigen::VectorXd>(double)>;

  int dim = 1;
  Eigen::MatrixXd mass;  // empty means identity
  VectorField grad_potential;
  ScalarField potential;
  MatrixField hessian;  // optional; finite differences of grad_potential otherwise
  double rho = 0.0;
  double alpha = 0.5;  // damping operator is D^(2α)
  std::optional<ExactSolution> exact_solution;

  Eigen::MatrixXd mass_matrix() const;
  Eigen::MatrixXd hessian_at(double t, const Eigen::VectorXd& x) const;
  double damping_order() const { return 2.0 * alpha; }

  /// Throws kInvalidArgument unless M is SPD, ρ ≥ 0 and 0 < α < 1.
  void validate() const;
};

/// h Σᵢ bᵢ L(t_k + cᵢh, q_d(cᵢh), q̇_d(cᵢh)); `stages` is (s+1)×d.
double discrete_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab,
                           const LagrangeBasis& basis, const Eigen::MatrixXd& stages, double t_k, double h);

/// ∂L_d/∂(stage i), 0-based i.
Eigen::VectorXd d_i_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab,
                               const LagrangeBasis& basis, const Eigen::MatrixXd& stages, double t_k,
                               double h, int i);

/// All partials at once, row i = ∂L_d/∂(stage i).
Eigen::MatrixXd d_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab,
                             const LagrangeBasis& basis, const Eigen::MatrixXd& stages, double t_k, double h);

/// Same as above for stages given as origin + increments (row ν holds
/// stage_ν − origin). Velocities then never difference absolute positions,
/// which keeps their rounding error independent of 1/h.
Eigen::MatrixXd d_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab,
                             const LagrangeBasis& basis, const Eigen::VectorXd& origin,
                             const Eigen::MatrixXd& increments, double t_k, double h);

/// Hessian of L_d with respect to the stacked stages (stage-major, (s+1)d square).
Eigen::MatrixXd d2_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab,
                              const LagrangeBasis& basis, const Eigen::MatrixXd& stages, double t_k, double h);

}  // namespace fvi
