#include "fvi/contour_kernels.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace fvi::kernels {

namespace {

using Real = long double;
using cx = ExtendedComplex;
using ExtendedVector = Eigen::Matrix<cx, Eigen::Dynamic, 1>;

constexpr Real kTwoPi = 2.0L * std::numbers::pi_v<Real>;

// e^{2πi j/M} for j = 0..M−1. Indexing by (ℓn mod M) keeps every phase exact
// instead of accumulating powers.
std::vector<cx> roots_of_unity(std::size_t points) {
  std::vector<cx> roots(points);
  for (std::size_t j = 0; j < points; ++j) {
    roots[j] = std::polar<Real>(1.0L, kTwoPi * static_cast<Real>(j) / static_cast<Real>(points));
  }
  return roots;
}

// γ(z) = A⁻¹ − z A⁻¹𝟙 bᵀA⁻¹ with A⁻¹ recomputed in extended precision, so
// that γ(1)𝟙 = 0 holds to extended rounding for stiffly accurate tableaux.
class Generator {
 public:
  explicit Generator(const ButcherTableau& tab) {
    const auto r = tab.stages();
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> a = tab.a().cast<Real>();
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> a_inv = a.fullPivLu().inverse();
    a_inv_ = a_inv.cast<cx>();
    u_ = (a_inv * Eigen::Matrix<Real, Eigen::Dynamic, 1>::Ones(r)).cast<cx>();
    v_ = (tab.b().cast<Real>().transpose() * a_inv).cast<cx>();
  }

  ExtendedMatrix operator()(cx z) const { return a_inv_ - z * (u_ * v_); }

 private:
  ExtendedMatrix a_inv_;
  ExtendedVector u_;
  Eigen::Matrix<cx, 1, Eigen::Dynamic> v_;
};

std::optional<ExtendedMatrix> sample_at(const Generator& gen, double exponent, double h, double radius,
                                        std::size_t l, std::size_t points, double max_condition) {
  const Real theta = -kTwoPi * static_cast<Real>(l) / static_cast<Real>(points);
  const cx z = std::polar<Real>(radius, theta);
  return matrix_power(gen(z) / static_cast<Real>(h), -static_cast<Real>(exponent), max_condition);
}

// Pairwise summation of K_ℓ e^{2πiℓn/M} over ℓ ∈ [lo, hi): rounding grows
// like log M instead of M.
ExtendedMatrix partial_sum(const std::vector<ExtendedMatrix>& samples, const std::vector<cx>& roots, std::size_t n,
                           std::size_t lo, std::size_t hi) {
  const std::size_t m = samples.size();
  if (hi - lo <= 16) {
    ExtendedMatrix out = samples[lo] * roots[(lo * n) % m];
    for (std::size_t l = lo + 1; l < hi; ++l) out += samples[l] * roots[(l * n) % m];
    return out;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return partial_sum(samples, roots, n, lo, mid) + partial_sum(samples, roots, n, mid, hi);
}

Eigen::MatrixXcd finish(const ExtendedMatrix& sum, double radius, std::size_t n, std::size_t points) {
  const Real scale = std::pow(static_cast<Real>(radius), -static_cast<Real>(n)) / static_cast<Real>(points);
  return (sum * scale).unaryExpr([](const cx& v) {
    return std::complex<double>(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  });
}

}  // namespace

std::optional<ExtendedMatrix> matrix_power(const ExtendedMatrix& g, long double p, double max_condition) {
  Eigen::ComplexEigenSolver<ExtendedMatrix> es(g, true);
  if (es.info() != Eigen::Success) return std::nullopt;
  const ExtendedMatrix& v = es.eigenvectors();
  Eigen::JacobiSVD<ExtendedMatrix> svd(v);
  const auto& sv = svd.singularValues();
  const Real smin = sv(sv.size() - 1);
  if (!(smin > 0.0L) || sv(0) / smin > static_cast<Real>(max_condition)) return std::nullopt;
  ExtendedVector mu = es.eigenvalues();
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = std::pow(mu(i), p);
  return ExtendedMatrix(v * mu.asDiagonal() * v.inverse());
}

ContourSamples sample_contour_serial(const ButcherTableau& tab, double exponent, double h, double radius,
                                     std::size_t points, double max_condition) {
  const Generator gen(tab);
  ContourSamples out;
  out.values.resize(points);
  for (std::size_t l = 0; l < points; ++l) {
    auto k = sample_at(gen, exponent, h, radius, l, points, max_condition);
    if (!k) {
      out.degenerate_at = l;
      return out;
    }
    out.values[l] = std::move(*k);
  }
  return out;
}

ContourSamples sample_contour_parallel(const ButcherTableau& tab, double exponent, double h, double radius,
                                       std::size_t points, double max_condition) {
  const Generator gen(tab);
  ContourSamples out;
  out.values.resize(points);
  std::vector<char> ok(points, 1);
  const auto count = static_cast<long long>(points);
#pragma omp parallel for schedule(static)
  for (long long l = 0; l < count; ++l) {
    const auto i = static_cast<std::size_t>(l);
    if (auto k = sample_at(gen, exponent, h, radius, i, points, max_condition)) {
      out.values[i] = std::move(*k);
    } else {
      ok[i] = 0;
    }
  }
  for (std::size_t l = 0; l < points; ++l) {
    if (!ok[l]) {
      out.degenerate_at = l;
      break;
    }
  }
  return out;
}

std::vector<Eigen::MatrixXcd> contour_sum_serial(const std::vector<ExtendedMatrix>& samples, double radius,
                                                 std::size_t n_max) {
  const auto roots = roots_of_unity(samples.size());
  std::vector<Eigen::MatrixXcd> w(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    w[n] = finish(partial_sum(samples, roots, n, 0, samples.size()), radius, n, samples.size());
  }
  return w;
}

std::vector<Eigen::MatrixXcd> contour_sum_parallel(const std::vector<ExtendedMatrix>& samples, double radius,
                                                   std::size_t n_max) {
  const auto roots = roots_of_unity(samples.size());
  std::vector<Eigen::MatrixXcd> w(n_max + 1);
  const auto count = static_cast<long long>(n_max + 1);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long n = 0; n < count; ++n) {
    const auto i = static_cast<std::size_t>(n);
    w[i] = finish(partial_sum(samples, roots, i, 0, samples.size()), radius, i, samples.size());
  }
  return w;
}

std::vector<Eigen::MatrixXcd> contour_sum_fft(const std::vector<ExtendedMatrix>& samples, double radius,
                                              std::size_t n_max) {
  const std::size_t m = samples.size();
  const auto rows = samples.front().rows();
  const auto cols = samples.front().cols();
  std::vector<ExtendedMatrix> sums(n_max + 1, ExtendedMatrix::Zero(rows, cols));
  Eigen::FFT<Real> fft;
  fft.SetFlag(Eigen::FFT<Real>::Unscaled);
  std::vector<cx> in(m), out;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (std::size_t l = 0; l < m; ++l) in[l] = samples[l](i, j);
      fft.inv(out, in);  // Σ_ℓ x_ℓ e^{+2πiℓn/M}
      for (std::size_t n = 0; n <= n_max; ++n) sums[n](i, j) = out[n];
    }
  }
  std::vector<Eigen::MatrixXcd> w(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) w[n] = finish(sums[n], radius, n, m);
  return w;
}

}  // namespace fvi::kernels
