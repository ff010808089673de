#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fvi/cq.hpp"
#include "fvi/error.hpp"
#include "fvi/galerkin.hpp"
#include "fvi/tableau.hpp"

namespace fvi {

class WeightCache;

enum class JacobianMode { kAnalytic, kFiniteDifference };
enum class Predictor { kPreviousStages, kConstant };

struct FviConfig {
  double h = 0.1;
  std::size_t steps = 1;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  JacobianMode jacobian = JacobianMode::kAnalytic;
  Predictor predictor = Predictor::kPreviousStages;
  /// Apply the convolution quadrature to x − x₀ instead of x. Zero-history CQ
  /// of a curve that starts away from the origin sees a jump at t = 0 and
  /// produces an O(1/h) term in the first block; the shift removes it.
  bool subtract_initial_value = true;
  /// Contour settings for the damping weights. With four-fold oversampling
  /// the weights are accurate to double rounding, so sixth-order runs are not
  /// floored by them.
  ContourOptions contour = [] {
    ContourOptions o;
    o.oversampling = 4;
    o.backend = ContourBackend::kFft;
    return o;
  }();

  void validate() const;
};

struct NewtonStat {
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  // residual ∞-norm before each update and after the last
};

class NewtonFailure : public Error {
 public:
  NewtonFailure(std::size_t step, double residual, Eigen::VectorXd iterate, const std::string& detail);

  std::size_t step() const { return step_; }
  double residual() const { return residual_; }
  const Eigen::VectorXd& iterate() const { return iterate_; }

 private:
  std::size_t step_;
  double residual_;
  Eigen::VectorXd iterate_;
};

struct FviSolution {
  std::string method;
  StageTrajectory trajectory;
  std::vector<Eigen::VectorXd> positions;  // main nodes x_0..x_N
  std::vector<Eigen::VectorXd> momenta;    // p_0..p_N
  std::vector<double> times;
  std::vector<NewtonStat> newton_stats;
  std::optional<std::vector<double>> energy;
  std::uint64_t weights_fingerprint = 0;
};

/// Forward FDEL integrator for Lobatto IIIC convolution quadrature. Holds the
/// growing stage history; block k is solved for its stages 2..r given stage 1
/// (the end of block k−1) by Newton's method.
class LobattoFvi {
 public:
  LobattoFvi(LagrangianProblem prob, ButcherTableau tab, std::shared_ptr<const WeightSequence> weights,
             FviConfig cfg);

  /// Block 0 from x₀ and p₀. Must be called first.
  const Eigen::MatrixXd& init_step(const Eigen::VectorXd& x0, const Eigen::VectorXd& p0);

  /// Solves block k = completed_steps() and appends it.
  const Eigen::MatrixXd& step();

  std::size_t completed_steps() const { return traj_.size(); }
  const StageTrajectory& trajectory() const { return traj_; }
  const std::vector<NewtonStat>& newton_stats() const { return stats_; }

  /// [𝒟^(2α) x_k], all r rows, for a completed block.
  const Eigen::MatrixXd& damping(std::size_t k) const;

  /// p_k⁻ = −D₁L_d(block k) + ρh b₁ [𝒟x_k]¹.
  Eigen::VectorXd legendre_minus(std::size_t k) const;
  /// p_{k+1}⁺ = D_rL_d(block k) − ρh b_r [𝒟x_k]^r.
  Eigen::VectorXd legendre_plus(std::size_t k) const;

  /// FDEL residual of block k for trial stage values 2..r (stacked stage-major).
  /// Exposed for diagnostics and tests; the history of blocks < k is used.
  Eigen::VectorXd residual(std::size_t k, const Eigen::VectorXd& unknowns) const;

  const LagrangianProblem& problem() const { return prob_; }
  const ButcherTableau& tableau() const { return tab_; }
  const LagrangeBasis& basis() const { return basis_; }
  const WeightSequence& weights() const { return *weights_; }

 private:
  // Newton unknowns are the increments x_k^i − x_k^1, i = 2..r.
  Eigen::MatrixXd increment_block(const Eigen::VectorXd& delta) const;
  Eigen::VectorXd block_residual(std::size_t k, const Eigen::VectorXd& start, const Eigen::VectorXd& delta,
                                 const Eigen::MatrixXd& history, const Eigen::VectorXd& prev_end) const;
  Eigen::MatrixXd jacobian(std::size_t k, const Eigen::VectorXd& start, const Eigen::VectorXd& delta) const;
  Eigen::VectorXd predict(std::size_t k) const;
  const Eigen::MatrixXd& solve_block(std::size_t k, const Eigen::VectorXd& start);

  LagrangianProblem prob_;
  ButcherTableau tab_;
  LagrangeBasis basis_;
  std::shared_ptr<const WeightSequence> weights_;
  FviConfig cfg_;
  int r_;
  int d_;
  Eigen::VectorXd x0_;
  Eigen::VectorXd offset_;     // subtracted before applying the CQ
  Eigen::VectorXd p0_;
  StageTrajectory traj_;       // x
  std::vector<Eigen::MatrixXd> increments_;  // x_k − x_k^1, kept unrounded for velocities
  StageTrajectory shifted_;    // x − offset
  std::vector<Eigen::MatrixXd> damping_;
  Eigen::MatrixXd history_;    // Σ_{n≥1} W_n (x−offset)_{k−n} for the block being solved
  Eigen::VectorXd prev_end_;   // D_rL_d(block k−1) − ρh b_r [𝒟x_{k−1}]^r
  std::vector<NewtonStat> stats_;
};

/// Forward integrator for the midpoint Lagrangian with MIDCQ damping.
class MidcqFvi {
 public:
  MidcqFvi(LagrangianProblem prob, ScalarWeightSequence weights, FviConfig cfg);

  /// x₁ from x₀ and p₀.
  const Eigen::VectorXd& init_step(const Eigen::VectorXd& x0, const Eigen::VectorXd& p0);
  /// x_{k+1} for k = completed_steps().
  const Eigen::VectorXd& step();

  std::size_t completed_steps() const { return nodes_.size() - 1; }
  const std::vector<Eigen::VectorXd>& nodes() const { return nodes_; }
  const std::vector<NewtonStat>& newton_stats() const { return stats_; }

  /// 𝒟^(2α)x_j = Σ_{m≤j} w_{j−m}((x_m + x_{m+1})/2 − offset).
  Eigen::VectorXd damping(std::size_t j) const;

  Eigen::VectorXd legendre_minus(std::size_t k) const;
  Eigen::VectorXd legendre_plus(std::size_t k) const;

 private:
  const Eigen::VectorXd& solve_next(std::size_t k);
  double midpoint_time(std::size_t k) const { return (static_cast<double>(k) + 0.5) * cfg_.h; }
  Eigen::VectorXd d1(std::size_t k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  Eigen::VectorXd d2(std::size_t k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  LagrangianProblem prob_;
  ScalarWeightSequence w_;
  FviConfig cfg_;
  Eigen::MatrixXd mass_;
  Eigen::VectorXd offset_;
  Eigen::VectorXd p0_;
  std::vector<Eigen::VectorXd> nodes_;
  std::vector<Eigen::VectorXd> averages_;  // (x_m + x_{m+1})/2 − offset
  std::vector<NewtonStat> stats_;
};

/// Two-stage Lobatto IIIC map for α = 1/2 and identity mass, solved in closed
/// form: (x_k, p_k) ↦ (x_{k+1}, p_{k+1}).
std::pair<Eigen::VectorXd, Eigen::VectorXd> qp_closed_form(const LagrangianProblem& prob, double h,
                                                           const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                                                           double t = 0.0);

/// Full Lobatto FVI run over cfg.steps steps; weights come from `cache`
/// (WeightCache::global() when null).
FviSolution run(const LagrangianProblem& prob, const ButcherTableau& tab, const FviConfig& cfg,
                const Eigen::VectorXd& x0, const Eigen::VectorXd& p0, WeightCache* cache = nullptr);

/// Full MIDCQ run.
FviSolution run_midcq(const LagrangianProblem& prob, const FviConfig& cfg, const Eigen::VectorXd& x0,
                      const Eigen::VectorXd& p0);

}  // namespace fvi
