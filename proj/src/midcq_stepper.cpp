#include <string>

#include "fvi/stepper.hpp"
#include "fvi/weight_cache.hpp"
#include "newton.hpp"

namespace fvi {

// Midpoint discrete Lagrangian L_d(a, b) = h L(t_{k+1/2}, (a+b)/2, (b−a)/h).
// The damping enters both momentum maps with weight ½ (the midpoint rule's
// half of ρ h 𝒟x on each side of the step).

MidcqFvi::MidcqFvi(LagrangianProblem prob, ScalarWeightSequence weights, FviConfig cfg)
    : prob_(std::move(prob)), w_(std::move(weights)), cfg_(cfg) {
  prob_.validate();
  cfg_.validate();
  if (w_.count() == 0) throw Error(ErrorKind::kInvalidArgument, "empty MIDCQ weight sequence");
  if (w_.h != cfg_.h) throw Error(ErrorKind::kInvalidArgument, "weights were built for another step size");
  mass_ = prob_.mass_matrix();
}

Eigen::VectorXd MidcqFvi::d1(std::size_t k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const Eigen::VectorXd mid = 0.5 * (a + b);
  return -mass_ * (b - a) / cfg_.h - 0.5 * cfg_.h * prob_.grad_potential(midpoint_time(k), mid);
}

Eigen::VectorXd MidcqFvi::d2(std::size_t k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const Eigen::VectorXd mid = 0.5 * (a + b);
  return mass_ * (b - a) / cfg_.h - 0.5 * cfg_.h * prob_.grad_potential(midpoint_time(k), mid);
}

Eigen::VectorXd MidcqFvi::damping(std::size_t j) const {
  if (j >= averages_.size()) throw Error(ErrorKind::kIndexOutOfRange, "node average " + std::to_string(j));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(prob_.dim);
  for (std::size_t m = 0; m <= j; ++m) out += w_[j - m] * averages_[m];
  return out;
}

Eigen::VectorXd MidcqFvi::legendre_minus(std::size_t k) const {
  if (k + 1 >= nodes_.size()) throw Error(ErrorKind::kIndexOutOfRange, "step " + std::to_string(k));
  return -d1(k, nodes_[k], nodes_[k + 1]) + 0.5 * prob_.rho * cfg_.h * damping(k);
}

Eigen::VectorXd MidcqFvi::legendre_plus(std::size_t k) const {
  if (k + 1 >= nodes_.size()) throw Error(ErrorKind::kIndexOutOfRange, "step " + std::to_string(k));
  return d2(k, nodes_[k], nodes_[k + 1]) - 0.5 * prob_.rho * cfg_.h * damping(k);
}

const Eigen::VectorXd& MidcqFvi::init_step(const Eigen::VectorXd& x0, const Eigen::VectorXd& p0) {
  if (!nodes_.empty()) throw Error(ErrorKind::kInvalidArgument, "init_step called twice");
  if (x0.size() != prob_.dim || p0.size() != prob_.dim) {
    throw Error(ErrorKind::kShapeMismatch, "initial data dimension");
  }
  p0_ = p0;
  offset_ = cfg_.subtract_initial_value ? x0 : Eigen::VectorXd::Zero(prob_.dim);
  nodes_.push_back(x0);
  return solve_next(0);
}

const Eigen::VectorXd& MidcqFvi::step() {
  if (nodes_.empty()) throw Error(ErrorKind::kHistoryIncomplete, "init_step has not been called");
  const std::size_t k = completed_steps();
  if (k >= w_.count()) throw Error(ErrorKind::kIndexOutOfRange, "weights cover " + std::to_string(w_.count()));
  return solve_next(k);
}

const Eigen::VectorXd& MidcqFvi::solve_next(std::size_t k) {
  const Eigen::VectorXd& xk = nodes_[k];
  const double rho_h = prob_.rho * cfg_.h;
  // Known part: momentum arriving at x_k and the damping history of step k.
  Eigen::VectorXd incoming;
  Eigen::VectorXd history = Eigen::VectorXd::Zero(prob_.dim);
  for (std::size_t m = 0; m < k; ++m) history += w_[k - m] * averages_[m];
  if (k == 0) {
    incoming = p0_;
  } else {
    incoming = legendre_plus(k - 1);
  }
  auto residual = [&](const Eigen::VectorXd& x1) -> Eigen::VectorXd {
    const Eigen::VectorXd dx = history + w_[0] * (0.5 * (xk + x1) - offset_);
    return incoming + d1(k, xk, x1) - 0.5 * rho_h * dx;
  };
  auto jacobian = [&](const Eigen::VectorXd& x1) -> Eigen::MatrixXd {
    if (cfg_.jacobian == JacobianMode::kFiniteDifference) return detail::forward_difference_jacobian(residual, x1);
    Eigen::MatrixXd jac = -mass_ / cfg_.h - 0.25 * cfg_.h * prob_.hessian_at(midpoint_time(k), 0.5 * (xk + x1));
    jac.diagonal().array() -= 0.25 * rho_h * w_[0];
    return jac;
  };

  Eigen::VectorXd x1;
  if (cfg_.predictor == Predictor::kConstant) {
    x1 = xk;
  } else if (k == 0) {
    x1 = xk + cfg_.h * mass_.ldlt().solve(p0_);
  } else {
    x1 = 2.0 * xk - nodes_[k - 1];
  }
  stats_.push_back(detail::newton_solve(x1, residual, jacobian, cfg_.newton_tol, cfg_.newton_max_iter, k));
  averages_.push_back(0.5 * (xk + x1) - offset_);
  nodes_.push_back(std::move(x1));
  return nodes_.back();
}

FviSolution run_midcq(const LagrangianProblem& prob, const FviConfig& cfg, const Eigen::VectorXd& x0,
                      const Eigen::VectorXd& p0) {
  cfg.validate();
  prob.validate();
  auto weights = midcq_weights(-prob.damping_order(), cfg.h, cfg.steps);
  const auto fingerprint = weights_fingerprint(weights);
  MidcqFvi fvi(prob, std::move(weights), cfg);
  fvi.init_step(x0, p0);
  for (std::size_t k = 1; k < cfg.steps; ++k) fvi.step();

  StageTrajectory traj(prob.dim, 2, cfg.h, true);
  const auto& nodes = fvi.nodes();
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    Eigen::MatrixXd block(2, prob.dim);
    block.row(0) = nodes[k].transpose();
    block.row(1) = nodes[k + 1].transpose();
    traj.append(std::move(block));
  }
  FviSolution sol{"midcq", std::move(traj), nodes, {}, {}, fvi.newton_stats(), std::nullopt, fingerprint};
  for (std::size_t k = 0; k <= cfg.steps; ++k) {
    sol.times.push_back(static_cast<double>(k) * cfg.h);
    sol.momenta.push_back(k < cfg.steps ? fvi.legendre_minus(k) : fvi.legendre_plus(k - 1));
  }
  return sol;
}

}  // namespace fvi
