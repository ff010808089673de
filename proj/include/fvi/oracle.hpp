#pragma once

// Independent reference computations. Nothing here depends on the CQ or the
// integrators, so tests can check those against it.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fvi/cq.hpp"
#include "fvi/error.hpp"

namespace fvi::oracle {

enum class RlKind { kIntegral, kDerivative };

/// Riemann–Liouville integral or derivative of order β of t^m at t > 0.
double rl_monomial(int m, double beta, double t, RlKind kind);

/// Grünwald–Letnikov weights h^(−β)(−1)ⁿ binom(β, n).
ScalarWeightSequence gl_weights(double beta, double h, std::size_t n_max);

/// Σ_{n=0}^{k} w_{k−n} f_n.
double apply_scalar(const ScalarWeightSequence& w, const std::vector<double>& f, std::size_t k);

/// Cauchy product c_n = Σ_{m≤n} a_m b_{n−m}.
std::vector<double> brute_convolve(const std::vector<double>& a, const std::vector<double>& b);
std::vector<Eigen::MatrixXd> brute_convolve(const std::vector<Eigen::MatrixXd>& a,
                                            const std::vector<Eigen::MatrixXd>& b);

/// Index-by-index Σ_n Σ_j [W_n]_{ij} f_{k−n}^j, no matrix products.
Eigen::MatrixXd brute_retarded(const std::vector<Eigen::MatrixXd>& w, const std::vector<Eigen::MatrixXd>& f,
                               std::size_t k);

/// γ(z) by direct inversion of A + z/(1−z) 𝟙bᵀ.
Eigen::MatrixXcd gamma_by_inversion(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::complex<double> z);

/// Central finite difference of a scalar function along each coordinate.
template <typename F>
Eigen::VectorXd central_gradient(F&& f, const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

/// Least-squares slope of log₂ y against log₂ x.
double log2_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fvi::oracle
