#include "fvi/galerkin.hpp"

#include <cmath>
#include <string>

#include "fvi/error.hpp"

namespace fvi {

LagrangeBasis lagrange_basis(const Eigen::VectorXd& nodes, const Eigen::VectorXd& abscissae) {
  const Eigen::Index n = nodes.size();
  if (n < 2) throw Error(ErrorKind::kDegenerateNodes, "need at least two control points");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(nodes(i) - nodes(j)) < 1e-14) {
        throw Error(ErrorKind::kDegenerateNodes, "control points " + std::to_string(i) + " and " +
                                                     std::to_string(j) + " coincide");
      }
    }
  }
  LagrangeBasis basis{nodes, Eigen::MatrixXd(n, abscissae.size()), Eigen::MatrixXd(n, abscissae.size())};
  for (Eigen::Index nu = 0; nu < n; ++nu) {
    for (Eigen::Index i = 0; i < abscissae.size(); ++i) {
      const double c = abscissae(i);
      double value = 1.0;
      for (Eigen::Index m = 0; m < n; ++m) {
        if (m != nu) value *= (c - nodes(m)) / (nodes(nu) - nodes(m));
      }
      double slope = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == nu) continue;
        double term = 1.0 / (nodes(nu) - nodes(j));
        for (Eigen::Index m = 0; m < n; ++m) {
          if (m != nu && m != j) term *= (c - nodes(m)) / (nodes(nu) - nodes(m));
        }
        slope += term;
      }
      basis.eval(nu, i) = value;
      basis.deriv(nu, i) = slope;
    }
  }
  return basis;
}

LagrangeBasis basis_for(const ButcherTableau& tab) {
  if (tab.stages() == 1) return lagrange_basis(Eigen::Vector2d(0.0, 1.0), tab.c());
  return lagrange_basis(tab.c(), tab.c());
}

Eigen::MatrixXd LagrangianProblem::mass_matrix() const {
  return mass.size() == 0 ? Eigen::MatrixXd::Identity(dim, dim) : mass;
}

Eigen::MatrixXd LagrangianProblem::hessian_at(double t, const Eigen::VectorXd& x) const {
  if (hessian) return hessian(t, x);
  Eigen::MatrixXd hess(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const double step = 1e-6 * (1.0 + std::abs(x(j)));
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    hess.col(j) = (grad_potential(t, xp) - grad_potential(t, xm)) / (2.0 * step);
  }
  return 0.5 * (hess + hess.transpose());
}

void LagrangianProblem::validate() const {
  if (dim < 1) throw Error(ErrorKind::kInvalidArgument, "dimension must be positive");
  if (!grad_potential) throw Error(ErrorKind::kInvalidArgument, "grad_potential is required");
  if (!potential) throw Error(ErrorKind::kInvalidArgument, "potential is required");
  if (mass.size() != 0) {
    if (mass.rows() != dim || mass.cols() != dim) throw Error(ErrorKind::kShapeMismatch, "mass matrix size");
    if (!mass.isApprox(mass.transpose(), 1e-14) || Eigen::LLT<Eigen::MatrixXd>(mass).info() != Eigen::Success) {
      throw Error(ErrorKind::kInvalidArgument, "mass matrix must be symmetric positive definite");
    }
  }
  if (!(rho >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "damping coefficient must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::kInvalidArgument, "alpha must lie in (0, 1)");
}

namespace {

struct QuadraturePoint {
  double t;
  Eigen::VectorXd q;
  Eigen::VectorXd v;
};

QuadraturePoint at(const ButcherTableau& tab, const LagrangeBasis& basis, const Eigen::MatrixXd& stages,
                   double t_k, double h, int i) {
  return {t_k + tab.c()(i) * h, stages.transpose() * basis.eval.col(i), stages.transpose() * basis.deriv.col(i) / h};
}

// Σ_ν ℓ_ν = 1 and Σ_ν ℓ'_ν = 0, so the origin only shifts q.
QuadraturePoint at(const ButcherTableau& tab, const LagrangeBasis& basis, const Eigen::VectorXd& origin,
                   const Eigen::MatrixXd& increments, double t_k, double h, int i) {
  auto qp = at(tab, basis, increments, t_k, h, i);
  qp.q += origin;
  return qp;
}

void check_stages(const LagrangianProblem& prob, const LagrangeBasis& basis, const Eigen::MatrixXd& stages) {
  if (stages.rows() != basis.control_points() || stages.cols() != prob.dim) {
    throw Error(ErrorKind::kShapeMismatch, "stage matrix is " + std::to_string(stages.rows()) + "x" +
                                               std::to_string(stages.cols()));
  }
}

}  // namespace

double discrete_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab, const LagrangeBasis& basis,
                           const Eigen::MatrixXd& stages, double t_k, double h) {
  check_stages(prob, basis, stages);
  const Eigen::MatrixXd m = prob.mass_matrix();
  double sum = 0.0;
  for (int i = 0; i < tab.stages(); ++i) {
    const auto qp = at(tab, basis, stages, t_k, h, i);
    sum += tab.b()(i) * (0.5 * qp.v.dot(m * qp.v) - prob.potential(qp.t, qp.q));
  }
  return h * sum;
}

Eigen::MatrixXd d_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab, const LagrangeBasis& basis,
                             const Eigen::MatrixXd& stages, double t_k, double h) {
  return d_lagrangian(prob, tab, basis, Eigen::VectorXd::Zero(prob.dim), stages, t_k, h);
}

Eigen::MatrixXd d_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab, const LagrangeBasis& basis,
                             const Eigen::VectorXd& origin, const Eigen::MatrixXd& increments, double t_k, double h) {
  check_stages(prob, basis, increments);
  const auto& stages = increments;
  const Eigen::MatrixXd m = prob.mass_matrix();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(stages.rows(), stages.cols());
  for (int j = 0; j < tab.stages(); ++j) {
    const auto qp = at(tab, basis, origin, increments, t_k, h, j);
    const Eigen::RowVectorXd force = prob.grad_potential(qp.t, qp.q).transpose();
    const Eigen::RowVectorXd momentum = (m * qp.v).transpose();
    for (Eigen::Index nu = 0; nu < stages.rows(); ++nu) {
      out.row(nu) += tab.b()(j) * (momentum * basis.deriv(nu, j) - h * force * basis.eval(nu, j));
    }
  }
  return out;
}

Eigen::VectorXd d_i_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab, const LagrangeBasis& basis,
                               const Eigen::MatrixXd& stages, double t_k, double h, int i) {
  if (i < 0 || i >= basis.control_points()) {
    throw Error(ErrorKind::kIndexOutOfRange, "stage index " + std::to_string(i));
  }
  return d_lagrangian(prob, tab, basis, stages, t_k, h).row(i).transpose();
}

Eigen::MatrixXd d2_lagrangian(const LagrangianProblem& prob, const ButcherTableau& tab, const LagrangeBasis& basis,
                              const Eigen::MatrixXd& stages, double t_k, double h) {
  check_stages(prob, basis, stages);
  const Eigen::MatrixXd m = prob.mass_matrix();
  const auto s = stages.rows();
  const auto d = stages.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s * d, s * d);
  for (int j = 0; j < tab.stages(); ++j) {
    const auto qp = at(tab, basis, stages, t_k, h, j);
    const Eigen::MatrixXd hess = prob.hessian_at(qp.t, qp.q);
    for (Eigen::Index nu = 0; nu < s; ++nu) {
      for (Eigen::Index mu = 0; mu < s; ++mu) {
        out.block(nu * d, mu * d, d, d) +=
            tab.b()(j) * (m * (basis.deriv(nu, j) * basis.deriv(mu, j) / h) -
                          hess * (h * basis.eval(nu, j) * basis.eval(mu, j)));
      }
    }
  }
  return out;
}

}  // namespace fvi
