#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "fvi/stepper.hpp"

namespace fvi::detail {

// Undamped Newton iteration on residual(u) = 0 with a fresh Jacobian each
// iteration. Throws NewtonFailure carrying the last iterate.
template <typename Residual, typename Jacobian>
NewtonStat newton_solve(Eigen::VectorXd& u, Residual&& residual, Jacobian&& jacobian, double tol, int max_iter,
                        std::size_t step) {
  NewtonStat stat;
  Eigen::VectorXd f = residual(u);
  double norm = f.lpNorm<Eigen::Infinity>();
  stat.history.push_back(norm);
  while (!(norm <= tol)) {
    if (!std::isfinite(norm)) throw NewtonFailure(step, norm, u, "residual is not finite");
    if (stat.iterations >= max_iter) {
      throw NewtonFailure(step, norm, u, "no convergence in " + std::to_string(max_iter) + " iterations");
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(u));
    u -= lu.solve(f);
    ++stat.iterations;
    f = residual(u);
    norm = f.lpNorm<Eigen::Infinity>();
    stat.history.push_back(norm);
  }
  stat.residual = norm;
  return stat;
}

template <typename Residual>
Eigen::MatrixXd forward_difference_jacobian(Residual&& residual, const Eigen::VectorXd& u) {
  const Eigen::VectorXd f0 = residual(u);
  Eigen::MatrixXd jac(f0.size(), u.size());
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    Eigen::VectorXd up = u;
    const double step = 1e-7 * (1.0 + std::abs(u(j)));
    up(j) += step;
    jac.col(j) = (residual(up) - f0) / step;
  }
  return jac;
}

}  // namespace fvi::detail
