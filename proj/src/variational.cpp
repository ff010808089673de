#include "fvi/variational.hpp"

#include <string>

#include "fvi/error.hpp"
#include "newton.hpp"

namespace fvi {

namespace {

bool is_free(std::size_t k, int i, std::size_t n, int r) {
  return k < n && i >= 1 && !(k + 1 == n && i == r - 1);
}

std::size_t closed_steps(const StageTrajectory& closed) {
  if (closed.size() < 2) throw Error(ErrorKind::kInvalidArgument, "closed trajectory needs at least two blocks");
  return closed.size() - 1;
}

StageTrajectory shifted(const StageTrajectory& x, const Eigen::VectorXd& offset) {
  StageTrajectory out(x.dim(), x.stages(), x.h(), x.continuity());
  for (std::size_t k = 0; k < x.size(); ++k) out.append(x[k].rowwise() - offset.transpose());
  return out;
}

StageTrajectory b_weighted(const StageTrajectory& y, const Eigen::VectorXd& b) {
  StageTrajectory out(y.dim(), y.stages(), y.h(), false);
  for (std::size_t k = 0; k < y.size(); ++k) out.append(b.asDiagonal() * y[k]);
  return out;
}

// Sums the two rows of every shared node into the earlier block and zeroes
// everything that is not a free variable.
std::vector<Eigen::MatrixXd> fold(std::vector<Eigen::MatrixXd> raw, std::size_t n, int r) {
  for (std::size_t k = 0; k + 1 < n; ++k) raw[k].row(r - 1) += raw[k + 1].row(0);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    for (int i = 0; i < r; ++i) {
      if (!is_free(k, i, n, r)) raw[k].row(i).setZero();
    }
  }
  return raw;
}

std::vector<Eigen::MatrixXd> lagrangian_rows(const LagrangianProblem& prob, const ButcherTableau& tab,
                                             const LagrangeBasis& basis, const StageTrajectory& x) {
  const std::size_t n = x.size() - 1;
  std::vector<Eigen::MatrixXd> rows(n + 1, Eigen::MatrixXd::Zero(x.stages(), x.dim()));
  for (std::size_t k = 0; k < n; ++k) {
    rows[k] = d_lagrangian(prob, tab, basis, x[k], static_cast<double>(k) * x.h(), x.h());
  }
  return rows;
}

}  // namespace

StageTrajectory close_trajectory(const StageTrajectory& open) {
  if (open.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot close an empty trajectory");
  StageTrajectory out(open.dim(), open.stages(), open.h(), true);
  for (std::size_t k = 0; k < open.size(); ++k) out.append(open[k]);
  Eigen::MatrixXd last = Eigen::MatrixXd::Zero(open.stages(), open.dim());
  last.row(0) = open.back().row(open.stages() - 1);
  out.append(std::move(last));
  return out;
}

double discrete_action(const LagrangianProblem& prob, const ButcherTableau& tab, const LagrangeBasis& basis,
                       const WeightSequence& w_alpha, const StageTrajectory& x, const StageTrajectory& y,
                       const Eigen::VectorXd& offset) {
  const std::size_t n = closed_steps(x);
  if (y.size() != x.size()) throw Error(ErrorKind::kShapeMismatch, "x and y have different lengths");
  const double h = x.h();
  double action = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t_k = static_cast<double>(k) * h;
    action += discrete_lagrangian(prob, tab, basis, x[k], t_k, h) + discrete_lagrangian(prob, tab, basis, y[k], t_k, h);
  }
  const StageTrajectory xs = shifted(x, offset);
  const StageTrajectory by = b_weighted(y, tab.b());
  double coupling = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    coupling += apply_advanced(w_alpha, by, k).cwiseProduct(apply_retarded(w_alpha, xs, k)).sum();
  }
  return action - prob.rho * h * coupling;
}

std::vector<Eigen::MatrixXd> x_residuals(const LagrangianProblem& prob, const ButcherTableau& tab,
                                         const LagrangeBasis& basis, const WeightSequence& w_2alpha,
                                         const StageTrajectory& x, const Eigen::VectorXd& offset) {
  const std::size_t n = closed_steps(x);
  auto raw = lagrangian_rows(prob, tab, basis, x);
  const StageTrajectory xs = shifted(x, offset);
  for (std::size_t k = 0; k < n; ++k) {
    raw[k] -= prob.rho * x.h() * (tab.b().asDiagonal() * apply_retarded(w_2alpha, xs, k));
  }
  return fold(std::move(raw), n, x.stages());
}

std::vector<Eigen::MatrixXd> y_residuals(const LagrangianProblem& prob, const ButcherTableau& tab,
                                         const LagrangeBasis& basis, const WeightSequence& w_2alpha,
                                         const StageTrajectory& y) {
  const std::size_t n = closed_steps(y);
  auto raw = lagrangian_rows(prob, tab, basis, y);
  const StageTrajectory by = b_weighted(y, tab.b());
  for (std::size_t k = 0; k < n; ++k) raw[k] -= prob.rho * y.h() * apply_advanced(w_2alpha, by, k);
  return fold(std::move(raw), n, y.stages());
}

std::size_t free_variable_count(const StageTrajectory& closed) {
  const std::size_t n = closed_steps(closed);
  return ((static_cast<std::size_t>(closed.stages()) - 1) * n - 1) * static_cast<std::size_t>(closed.dim());
}

Eigen::VectorXd pack_free(const std::vector<Eigen::MatrixXd>& per_block, int dim) {
  if (per_block.size() < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two blocks");
  const std::size_t n = per_block.size() - 1;
  const int r = static_cast<int>(per_block.front().rows());
  Eigen::VectorXd out(((r - 1) * n - 1) * static_cast<std::size_t>(dim));
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (int i = 1; i < r; ++i) {
      if (!is_free(k, i, n, r)) continue;
      out.segment(pos, dim) = per_block[k].row(i).transpose();
      pos += dim;
    }
  }
  return out;
}

Eigen::VectorXd pack_free(const StageTrajectory& closed) {
  closed_steps(closed);
  std::vector<Eigen::MatrixXd> blocks;
  for (std::size_t k = 0; k < closed.size(); ++k) blocks.push_back(closed[k]);
  return pack_free(blocks, closed.dim());
}

StageTrajectory unpack_free(const StageTrajectory& closed, const Eigen::VectorXd& values) {
  const std::size_t n = closed_steps(closed);
  if (static_cast<std::size_t>(values.size()) != free_variable_count(closed)) {
    throw Error(ErrorKind::kShapeMismatch, "expected " + std::to_string(free_variable_count(closed)) +
                                               " free values, got " + std::to_string(values.size()));
  }
  const int r = closed.stages();
  const int d = closed.dim();
  StageTrajectory out(d, r, closed.h(), closed.continuity());
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    Eigen::MatrixXd block = closed[k];
    if (k > 0) block.row(0) = out.back().row(r - 1);
    for (int i = 1; i < r; ++i) {
      if (!is_free(k, i, n, r)) continue;
      block.row(i) = values.segment(pos, d).transpose();
      pos += d;
    }
    out.append(std::move(block));
  }
  return out;
}

StageTrajectory solve_y_equations(const LagrangianProblem& prob, const ButcherTableau& tab,
                                  const LagrangeBasis& basis, const WeightSequence& w_2alpha,
                                  const StageTrajectory& closed_guess, double tol, int max_iter) {
  auto residual = [&](const Eigen::VectorXd& v) {
    return pack_free(y_residuals(prob, tab, basis, w_2alpha, unpack_free(closed_guess, v)), closed_guess.dim());
  };
  auto jacobian = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd jac(v.size(), v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const double step = 1e-6 * (1.0 + std::abs(v(j)));
      Eigen::VectorXd vp = v, vm = v;
      vp(j) += step;
      vm(j) -= step;
      jac.col(j) = (residual(vp) - residual(vm)) / (2.0 * step);
    }
    return jac;
  };
  Eigen::VectorXd v = pack_free(closed_guess);
  detail::newton_solve(v, residual, jacobian, tol, max_iter, 0);
  return unpack_free(closed_guess, v);
}

double action_directional_derivative(const LagrangianProblem& prob, const ButcherTableau& tab,
                                     const LagrangeBasis& basis, const WeightSequence& w_alpha,
                                     const StageTrajectory& x, const StageTrajectory& y,
                                     const Eigen::VectorXd& offset, const Eigen::VectorXd& delta, double step) {
  const Eigen::VectorXd xv = pack_free(x);
  const Eigen::VectorXd yv = pack_free(y);
  auto action_at = [&](double eps) {
    return discrete_action(prob, tab, basis, w_alpha, unpack_free(x, xv + eps * delta),
                           unpack_free(y, yv + eps * delta), offset);
  };
  return (8.0 * (action_at(step) - action_at(-step)) - (action_at(2.0 * step) - action_at(-2.0 * step))) /
         (12.0 * step);
}

}  // namespace fvi
