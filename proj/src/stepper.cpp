#include "fvi/stepper.hpp"

#include <string>

#include "fvi/weight_cache.hpp"
#include "newton.hpp"

namespace fvi {

void FviConfig::validate() const {
  if (!(h > 0.0)) throw Error(ErrorKind::kInvalidArgument, "step size must be positive");
  if (steps < 1) throw Error(ErrorKind::kInvalidArgument, "at least one step is required");
  if (!(newton_tol > 0.0)) throw Error(ErrorKind::kInvalidArgument, "newton tolerance must be positive");
  if (newton_max_iter < 1) throw Error(ErrorKind::kInvalidArgument, "newton_max_iter must be positive");
}

NewtonFailure::NewtonFailure(std::size_t step, double residual, Eigen::VectorXd iterate, const std::string& detail)
    : Error(ErrorKind::kNewtonFailure,
            "step " + std::to_string(step) + ": " + detail + " (residual " + std::to_string(residual) + ")"),
      step_(step),
      residual_(residual),
      iterate_(std::move(iterate)) {}

LobattoFvi::LobattoFvi(LagrangianProblem prob, ButcherTableau tab, std::shared_ptr<const WeightSequence> weights,
                       FviConfig cfg)
    : prob_(std::move(prob)),
      tab_(std::move(tab)),
      basis_(basis_for(tab_)),
      weights_(std::move(weights)),
      cfg_(cfg),
      r_(tab_.stages()),
      d_(prob_.dim),
      traj_(prob_.dim, tab_.stages(), cfg.h, true),
      shifted_(prob_.dim, tab_.stages(), cfg.h, true) {
  prob_.validate();
  cfg_.validate();
  if (!tab_.has_endpoint_stages()) {
    throw Error(ErrorKind::kInvalidArgument, "FDEL stepping needs a tableau with c_1 = 0 and c_r = 1");
  }
  if (!weights_ || weights_->stages() != r_) throw Error(ErrorKind::kShapeMismatch, "weights do not match tableau");
  if (weights_->h() != cfg_.h) throw Error(ErrorKind::kInvalidArgument, "weights were built for another step size");
}

const Eigen::MatrixXd& LobattoFvi::init_step(const Eigen::VectorXd& x0, const Eigen::VectorXd& p0) {
  if (!traj_.empty()) throw Error(ErrorKind::kInvalidArgument, "init_step called twice");
  if (x0.size() != d_ || p0.size() != d_) throw Error(ErrorKind::kShapeMismatch, "initial data dimension");
  x0_ = x0;
  p0_ = p0;
  offset_ = cfg_.subtract_initial_value ? x0 : Eigen::VectorXd::Zero(d_);
  prev_end_ = p0;
  return solve_block(0, x0);
}

const Eigen::MatrixXd& LobattoFvi::step() {
  if (traj_.empty()) throw Error(ErrorKind::kHistoryIncomplete, "init_step has not been called");
  const std::size_t k = traj_.size();
  if (k > weights_->last_index()) {
    throw Error(ErrorKind::kIndexOutOfRange, "weights cover " + std::to_string(weights_->count()) + " blocks");
  }
  return solve_block(k, traj_.back().row(r_ - 1).transpose());
}

const Eigen::MatrixXd& LobattoFvi::damping(std::size_t k) const {
  if (k >= damping_.size()) throw Error(ErrorKind::kIndexOutOfRange, "block " + std::to_string(k) + " not solved");
  return damping_[k];
}

Eigen::VectorXd LobattoFvi::legendre_minus(std::size_t k) const {
  const auto& dx = damping(k);
  const double t_k = static_cast<double>(k) * cfg_.h;
  const Eigen::VectorXd start = traj_[k].row(0).transpose();
  return -d_lagrangian(prob_, tab_, basis_, start, increments_[k], t_k, cfg_.h).row(0).transpose() +
         prob_.rho * cfg_.h * tab_.b()(0) * dx.row(0).transpose();
}

Eigen::VectorXd LobattoFvi::legendre_plus(std::size_t k) const {
  const auto& dx = damping(k);
  const double t_k = static_cast<double>(k) * cfg_.h;
  const Eigen::VectorXd start = traj_[k].row(0).transpose();
  return d_lagrangian(prob_, tab_, basis_, start, increments_[k], t_k, cfg_.h).row(r_ - 1).transpose() -
         prob_.rho * cfg_.h * tab_.b()(r_ - 1) * dx.row(r_ - 1).transpose();
}

Eigen::VectorXd LobattoFvi::residual(std::size_t k, const Eigen::VectorXd& unknowns) const {
  if (traj_.empty() || k > traj_.size()) {
    throw Error(ErrorKind::kHistoryIncomplete, "residual of block " + std::to_string(k) + " needs its history");
  }
  if (unknowns.size() != (r_ - 1) * d_) throw Error(ErrorKind::kShapeMismatch, "unknowns have the wrong size");
  const Eigen::VectorXd start = k == 0 ? x0_ : Eigen::VectorXd(traj_[k - 1].row(r_ - 1).transpose());
  const Eigen::VectorXd delta = unknowns - start.replicate(r_ - 1, 1);
  if (k == 0) return block_residual(0, start, delta, Eigen::MatrixXd::Zero(r_, d_), p0_);
  return block_residual(k, start, delta, retarded_history(*weights_, shifted_, k), legendre_plus(k - 1));
}

Eigen::MatrixXd LobattoFvi::increment_block(const Eigen::VectorXd& delta) const {
  Eigen::MatrixXd inc(r_, d_);
  inc.row(0).setZero();
  for (int i = 1; i < r_; ++i) inc.row(i) = delta.segment((i - 1) * d_, d_).transpose();
  return inc;
}

Eigen::VectorXd LobattoFvi::block_residual(std::size_t k, const Eigen::VectorXd& start, const Eigen::VectorXd& delta,
                                           const Eigen::MatrixXd& history, const Eigen::VectorXd& prev_end) const {
  const Eigen::MatrixXd inc = increment_block(delta);
  const Eigen::MatrixXd block = inc.rowwise() + start.transpose();
  const Eigen::MatrixXd shifted = block.rowwise() - offset_.transpose();
  const Eigen::MatrixXd dx = (*weights_)[0] * shifted + history;
  const Eigen::MatrixXd dl = d_lagrangian(prob_, tab_, basis_, start, inc, static_cast<double>(k) * cfg_.h, cfg_.h);
  const double rho_h = prob_.rho * cfg_.h;
  Eigen::VectorXd res((r_ - 1) * d_);
  for (int i = 0; i < r_ - 1; ++i) {
    res.segment(i * d_, d_) = (dl.row(i) - rho_h * tab_.b()(i) * dx.row(i)).transpose();
  }
  res.head(d_) += prev_end;
  return res;
}

Eigen::MatrixXd LobattoFvi::jacobian(std::size_t k, const Eigen::VectorXd& start, const Eigen::VectorXd& delta) const {
  if (cfg_.jacobian == JacobianMode::kFiniteDifference) {
    return detail::forward_difference_jacobian(
        [&](const Eigen::VectorXd& u) { return block_residual(k, start, u, history_, prev_end_); }, delta);
  }
  const Eigen::MatrixXd block = increment_block(delta).rowwise() + start.transpose();
  const Eigen::MatrixXd hess = d2_lagrangian(prob_, tab_, basis_, block, static_cast<double>(k) * cfg_.h, cfg_.h);
  const Eigen::MatrixXd& w0 = (*weights_)[0];
  const double rho_h = prob_.rho * cfg_.h;
  const int n = (r_ - 1) * d_;
  Eigen::MatrixXd jac = hess.block(0, d_, n, n);
  for (int i = 0; i < r_ - 1; ++i) {
    for (int j = 1; j < r_; ++j) {
      jac.block(i * d_, (j - 1) * d_, d_, d_).diagonal().array() -= rho_h * tab_.b()(i) * w0(i, j);
    }
  }
  return jac;
}

Eigen::VectorXd LobattoFvi::predict(std::size_t k) const {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero((r_ - 1) * d_);
  if (cfg_.predictor == Predictor::kConstant) return delta;
  if (k == 0) {
    const Eigen::VectorXd v = prob_.mass_matrix().ldlt().solve(p0_);
    for (int i = 1; i < r_; ++i) delta.segment((i - 1) * d_, d_) = tab_.c()(i) * cfg_.h * v;
    return delta;
  }
  for (int i = 1; i < r_; ++i) delta.segment((i - 1) * d_, d_) = increments_[k - 1].row(i).transpose();
  return delta;
}

const Eigen::MatrixXd& LobattoFvi::solve_block(std::size_t k, const Eigen::VectorXd& start) {
  history_ = k == 0 ? Eigen::MatrixXd::Zero(r_, d_) : retarded_history(*weights_, shifted_, k);
  Eigen::VectorXd delta = predict(k);
  auto stat = detail::newton_solve(
      delta, [&](const Eigen::VectorXd& v) { return block_residual(k, start, v, history_, prev_end_); },
      [&](const Eigen::VectorXd& v) { return jacobian(k, start, v); }, cfg_.newton_tol, cfg_.newton_max_iter, k);

  Eigen::MatrixXd inc = increment_block(delta);
  Eigen::MatrixXd block = inc.rowwise() + start.transpose();
  Eigen::MatrixXd shifted = block.rowwise() - offset_.transpose();
  damping_.push_back((*weights_)[0] * shifted + history_);
  traj_.append(std::move(block));
  shifted_.append(std::move(shifted));
  increments_.push_back(std::move(inc));
  stats_.push_back(std::move(stat));
  prev_end_ = legendre_plus(k);
  return traj_.back();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> qp_closed_form(const LagrangianProblem& prob, double h,
                                                           const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                                                           double t) {
  if (prob.alpha != 0.5) throw Error(ErrorKind::kInvalidArgument, "closed-form map needs alpha = 1/2");
  if (prob.mass.size() != 0 && !prob.mass.isIdentity(0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "closed-form map needs identity mass");
  }
  const double denom = 2.0 + prob.rho * h;
  if (!(denom > 0.0)) throw Error(ErrorKind::kInvalidArgument, "2 + rho h must be positive");
  const Eigen::VectorXd v = p - 0.5 * h * prob.grad_potential(t, x);
  Eigen::VectorXd x1 = x + (2.0 * h / denom) * v;
  Eigen::VectorXd p1 = ((2.0 - prob.rho * h) / denom) * v - 0.5 * h * prob.grad_potential(t + h, x1);
  return {std::move(x1), std::move(p1)};
}

FviSolution run(const LagrangianProblem& prob, const ButcherTableau& tab, const FviConfig& cfg,
                const Eigen::VectorXd& x0, const Eigen::VectorXd& p0, WeightCache* cache) {
  cfg.validate();
  prob.validate();
  WeightCache& store = cache ? *cache : WeightCache::global();
  auto weights = store.get(tab, -prob.damping_order(), cfg.h, cfg.steps, cfg.contour);

  LobattoFvi fvi(prob, tab, weights, cfg);
  fvi.init_step(x0, p0);
  for (std::size_t k = 1; k < cfg.steps; ++k) fvi.step();

  const int r = tab.stages();
  FviSolution sol{tab.label(), fvi.trajectory(), {}, {}, {}, fvi.newton_stats(), std::nullopt,
                  weights_fingerprint(*weights)};
  for (std::size_t k = 0; k <= cfg.steps; ++k) {
    sol.times.push_back(static_cast<double>(k) * cfg.h);
    if (k < cfg.steps) {
      sol.positions.push_back(fvi.trajectory()[k].row(0).transpose());
      sol.momenta.push_back(fvi.legendre_minus(k));
    } else {
      sol.positions.push_back(fvi.trajectory()[k - 1].row(r - 1).transpose());
      sol.momenta.push_back(fvi.legendre_plus(k - 1));
    }
  }
  return sol;
}

}  // namespace fvi
