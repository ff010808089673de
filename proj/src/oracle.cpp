#include "fvi/oracle.hpp"

#include <cmath>
#include <string>

namespace fvi::oracle {

namespace {

bool is_gamma_pole(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double rl_monomial(int m, double beta, double t, RlKind kind) {
  if (m < 0) throw Error(ErrorKind::kInvalidArgument, "monomial degree must be non-negative");
  if (!(t > 0.0)) throw Error(ErrorKind::kInvalidArgument, "evaluation time must be positive");
  const double shift = kind == RlKind::kIntegral ? beta : -beta;
  const double arg = m + 1.0 + shift;
  if (is_gamma_pole(arg)) {
    throw Error(ErrorKind::kGammaPole, "Gamma(" + std::to_string(arg) + ") for degree " + std::to_string(m) +
                                           " and order " + std::to_string(beta));
  }
  return std::tgamma(m + 1.0) / std::tgamma(arg) * std::pow(t, m + shift);
}

ScalarWeightSequence gl_weights(double beta, double h, std::size_t n_max) {
  if (!(h > 0.0)) throw Error(ErrorKind::kInvalidArgument, "step size must be positive");
  ScalarWeightSequence out{-beta, h, std::vector<double>(n_max + 1)};
  out.w[0] = std::pow(h, -beta);
  for (std::size_t n = 1; n <= n_max; ++n) {
    out.w[n] = out.w[n - 1] * (1.0 - (beta + 1.0) / static_cast<double>(n));
  }
  return out;
}

double apply_scalar(const ScalarWeightSequence& w, const std::vector<double>& f, std::size_t k) {
  if (k >= f.size() || k >= w.count()) throw Error(ErrorKind::kIndexOutOfRange, "index " + std::to_string(k));
  double s = 0.0;
  for (std::size_t n = 0; n <= k; ++n) s += w[k - n] * f[n];
  return s;
}

std::vector<double> brute_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kShapeMismatch, "sequences differ in length");
  std::vector<double> c(a.size(), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t m = 0; m <= n; ++m) c[n] += a[m] * b[n - m];
  }
  return c;
}

std::vector<Eigen::MatrixXd> brute_convolve(const std::vector<Eigen::MatrixXd>& a,
                                            const std::vector<Eigen::MatrixXd>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kShapeMismatch, "sequences differ in length");
  std::vector<Eigen::MatrixXd> c;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a[n].cols() != b[n].rows()) throw Error(ErrorKind::kShapeMismatch, "matrix sizes differ");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(a[n].rows(), b[n].cols());
    for (std::size_t m = 0; m <= n; ++m) s += a[m] * b[n - m];
    c.push_back(std::move(s));
  }
  return c;
}

Eigen::MatrixXd brute_retarded(const std::vector<Eigen::MatrixXd>& w, const std::vector<Eigen::MatrixXd>& f,
                               std::size_t k) {
  if (k >= w.size() || k >= f.size()) throw Error(ErrorKind::kIndexOutOfRange, "index " + std::to_string(k));
  const auto r = f[0].rows();
  const auto d = f[0].cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, d);
  for (std::size_t n = 0; n <= k; ++n) {
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index c = 0; c < d; ++c) out(i, c) += w[n](i, j) * f[k - n](j, c);
      }
    }
  }
  return out;
}

Eigen::MatrixXcd gamma_by_inversion(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::complex<double> z) {
  const auto r = b.size();
  const Eigen::MatrixXcd m =
      a.cast<std::complex<double>>() +
      (z / (1.0 - z)) * (Eigen::VectorXcd::Ones(r) * b.cast<std::complex<double>>().transpose());
  return m.inverse();
}

double log2_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::kInvalidArgument, "need two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log2(x[i]);
    const double ly = std::log2(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fvi::oracle
