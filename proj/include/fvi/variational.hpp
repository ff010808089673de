#pragma once

// Discrete action of the doubled (x, y) system and the two families of FDEL
// residuals. Forward integration only ever solves the x-equations; the
// anti-causal y-equations are assembled here so that stationarity of the
// action under restricted variations can be checked on small instances.
//
// Layout: a curve over blocks 0..N (block N closes the curve: its first row is
// the end of block N−1, the remaining rows are zero). Free variables are rows
// 1..r−1 of blocks 0..N−1, except the final main node (row r−1 of block N−1).
// Row r−1 of block k is the same variable as row 0 of block k+1.

#include <vector>

#include <Eigen/Dense>

#include "fvi/cq.hpp"
#include "fvi/galerkin.hpp"
#include "fvi/tableau.hpp"

namespace fvi {

/// Appends the terminal block (x_N, 0, ..., 0).
StageTrajectory close_trajectory(const StageTrajectory& open);

/// Σ_k [L_d(x_k) + L_d(y_k)] − ρh Σ_{k=0}^{N} ⟨𝒟₊^α(B y)_k, 𝒟₋^α(x − offset)_k⟩.
/// `w_alpha` holds the order-α weights (exponent −α).
double discrete_action(const LagrangianProblem& prob, const ButcherTableau& tab, const LagrangeBasis& basis,
                       const WeightSequence& w_alpha, const StageTrajectory& x, const StageTrajectory& y,
                       const Eigen::VectorXd& offset);

/// x-equations per free variable (rows of blocks 0..N−1; non-free rows are zero).
/// `w_2alpha` holds the order-2α weights.
std::vector<Eigen::MatrixXd> x_residuals(const LagrangianProblem& prob, const ButcherTableau& tab,
                                         const LagrangeBasis& basis, const WeightSequence& w_2alpha,
                                         const StageTrajectory& x, const Eigen::VectorXd& offset);

/// y-equations: D_iL_d(y) − ρh [𝒟₊^(2α)(B y)]^i, shared nodes summed.
std::vector<Eigen::MatrixXd> y_residuals(const LagrangianProblem& prob, const ButcherTableau& tab,
                                         const LagrangeBasis& basis, const WeightSequence& w_2alpha,
                                         const StageTrajectory& y);

/// Number of free scalar unknowns and packing helpers for the layout above.
std::size_t free_variable_count(const StageTrajectory& closed);
Eigen::VectorXd pack_free(const StageTrajectory& closed);
Eigen::VectorXd pack_free(const std::vector<Eigen::MatrixXd>& per_block, int dim);
/// Overwrites the free variables of `closed`, keeping shared rows consistent.
StageTrajectory unpack_free(const StageTrajectory& closed, const Eigen::VectorXd& values);

}  // namespace fvi

namespace fvi {

/// Solves the y-equations for the free y variables by dense Newton with a
/// finite-difference Jacobian, keeping the fixed rows of `closed_guess`.
/// Intended for the small instances used in consistency checks.
StageTrajectory solve_y_equations(const LagrangianProblem& prob, const ButcherTableau& tab,
                                  const LagrangeBasis& basis, const WeightSequence& w_2alpha,
                                  const StageTrajectory& closed_guess, double tol = 1e-12, int max_iter = 20);

/// d/dε 𝓛_d(x + ε δ, y + ε δ) at ε = 0 by a fourth-order central difference; δ is given in
/// packed free-variable form.
double action_directional_derivative(const LagrangianProblem& prob, const ButcherTableau& tab,
                                     const LagrangeBasis& basis, const WeightSequence& w_alpha,
                                     const StageTrajectory& x, const StageTrajectory& y,
                                     const Eigen::VectorXd& offset, const Eigen::VectorXd& delta,
                                     double step = 1e-3);

}  // namespace fvi
