#pragma once

// Inner loops of the contour-quadrature weight computation. Everything runs in
// extended precision (long double) and is rounded to double only when the
// weights are returned: the factor λ⁻ⁿ amplifies the rounding of every sample,
// and in double precision that noise becomes the error floor of high-order runs.
//
// The parallel variants split the outer index across OpenMP threads; each
// output entry is still reduced in a fixed order, so they match the serial
// ones bit for bit.

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fvi/tableau.hpp"

namespace fvi::kernels {

using ExtendedComplex = std::complex<long double>;
using ExtendedMatrix = Eigen::Matrix<ExtendedComplex, Eigen::Dynamic, Eigen::Dynamic>;

/// K(γ(z_ℓ)/h) at every contour point, or the index of the first point whose
/// eigendecomposition is degenerate.
struct ContourSamples {
  std::vector<ExtendedMatrix> values;
  std::optional<std::size_t> degenerate_at;
};

ContourSamples sample_contour_serial(const ButcherTableau& tab, double exponent, double h,
                                     double radius, std::size_t points, double max_condition);
ContourSamples sample_contour_parallel(const ButcherTableau& tab, double exponent, double h,
                                       double radius, std::size_t points, double max_condition);

/// W_n = λ⁻ⁿ/M Σ_ℓ K_ℓ e^{2πiℓn/M} for n = 0..n_max.
std::vector<Eigen::MatrixXcd> contour_sum_serial(const std::vector<ExtendedMatrix>& samples, double radius,
                                                 std::size_t n_max);
std::vector<Eigen::MatrixXcd> contour_sum_parallel(const std::vector<ExtendedMatrix>& samples, double radius,
                                                   std::size_t n_max);
/// Same sum by one inverse FFT per matrix entry; samples.size() should be a
/// power of two.
std::vector<Eigen::MatrixXcd> contour_sum_fft(const std::vector<ExtendedMatrix>& samples, double radius,
                                              std::size_t n_max);

/// Matrix power G^p via complex eigendecomposition; nullopt if the
/// eigenvector matrix has condition number above max_condition.
std::optional<ExtendedMatrix> matrix_power(const ExtendedMatrix& g, long double p, double max_condition);

}  // namespace fvi::kernels
