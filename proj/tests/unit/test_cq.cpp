#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <omp.h>

#include "doctest.h"
#include "fvi/contour_kernels.hpp"
#include "fvi/cq.hpp"
#include "fvi/error.hpp"
#include "fvi/oracle.hpp"
#include "fvi/weight_cache.hpp"
#include "test_problems.hpp"

using namespace fvi;
using fvi::testing::max_abs;
using fvi::testing::random_trajectory;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no fvi::Error thrown");
  return ErrorKind::kIo;
}

ContourOptions with_backend(ContourBackend b, std::size_t oversampling = 4) {
  ContourOptions o;
  o.backend = b;
  o.oversampling = oversampling;
  return o;
}

}  // namespace

TEST_SUITE("cq") {
  TEST_CASE("first-derivative weights of the two-stage method") {
    const double h = 0.1;
    const auto w = compute_weights(lobatto_iiic(2), -1.0, h, 64);
    Eigen::Matrix2d w0, w1;
    w0 << 1, 1, -1, 1;
    w1 << 0, -2, 0, 0;
    CHECK(max_abs(h * w[0] - w0) < 1e-8);
    CHECK(max_abs(h * w[1] - w1) < 1e-8);
    for (std::size_t n = 2; n <= 64; ++n) CHECK(max_abs(w[n]) < 1e-8 / h);
    CHECK(w.count() == 65);
    CHECK(w.stages() == 2);
  }

  TEST_CASE("first derivative has exactly two weights for every r") {
    // γ(z)/h is linear in z: W_0 = A⁻¹/h, W_1 = −A⁻¹𝟙bᵀA⁻¹/h.
    const double h = 0.05;
    for (int r = 2; r <= 4; ++r) {
      CAPTURE(r);
      const auto t = lobatto_iiic(r);
      const auto w = compute_weights(t, -1.0, h, 40, with_backend(ContourBackend::kFft));
      const Eigen::MatrixXd ai = t.a_inverse();
      const Eigen::MatrixXd w1 = -ai * Eigen::VectorXd::Ones(r) * t.b().transpose() * ai;
      CHECK(max_abs(h * w[0] - ai) < 1e-12);
      CHECK(max_abs(h * w[1] - w1) < 1e-12);
      for (std::size_t n = 2; n <= 40; ++n) CHECK(h * max_abs(w[n]) < 1e-12);
    }
  }

  TEST_CASE("integration weights are the RK quadrature") {
    // (γ(z)/h)⁻¹ = hA + h Σ_{n≥1} zⁿ 𝟙bᵀ
    const double h = 0.2;
    for (int r = 2; r <= 4; ++r) {
      const auto t = lobatto_iiic(r);
      const auto w = compute_weights(t, 1.0, h, 30, with_backend(ContourBackend::kParallel));
      const Eigen::MatrixXd tail = h * Eigen::VectorXd::Ones(r) * t.b().transpose();
      CHECK(max_abs(w[0] - h * t.a()) < 1e-13);
      for (std::size_t n = 1; n <= 30; ++n) CHECK(max_abs(w[n] - tail) < 1e-13);
    }
  }

  TEST_CASE("exponent zero gives the identity") {
    const auto w = compute_weights(lobatto_iiic(3), 0.0, 0.1, 10);
    CHECK(max_abs(w[0] - Eigen::MatrixXd::Identity(3, 3)) == 0.0);
    for (std::size_t n = 1; n <= 10; ++n) CHECK(max_abs(w[n]) == 0.0);
  }

  TEST_CASE("metadata") {
    ContourOptions o;
    o.oversampling = 2;
    const auto w = compute_weights(lobatto_iiic(2), -0.5, 0.1, 20, o);
    CHECK(w.contour_points() == 42);
    CHECK(w.radius() == doctest::Approx(std::pow(1e-16, 1.0 / 62.0)));
    CHECK(w.max_imag_residue() < 1e-10);
    CHECK(w.exponent() == -0.5);
    CHECK(w.tableau_label() == "lobatto2");
    const auto f = compute_weights(lobatto_iiic(2), -0.5, 0.1, 20, with_backend(ContourBackend::kFft, 2));
    CHECK(f.contour_points() == 64);
  }

  TEST_CASE("serial and parallel kernels are bit-identical") {
    omp_set_num_threads(4);
    const auto t = lobatto_iiic(3);
    const auto ws = compute_weights(t, -0.5, 0.03, 200, with_backend(ContourBackend::kSerial));
    const auto wp = compute_weights(t, -0.5, 0.03, 200, with_backend(ContourBackend::kParallel));
    for (std::size_t n = 0; n < ws.count(); ++n) REQUIRE(ws[n] == wp[n]);
    CHECK(weights_fingerprint(ws) == weights_fingerprint(wp));

    const double radius = std::pow(1e-16, 1.0 / 400.0);
    const auto a = kernels::sample_contour_serial(t, 0.5, 0.1, radius, 300, 1e12);
    const auto b = kernels::sample_contour_parallel(t, 0.5, 0.1, radius, 300, 1e12);
    for (std::size_t l = 0; l < a.values.size(); ++l) REQUIRE(a.values[l] == b.values[l]);
    const auto sa = kernels::contour_sum_serial(a.values, radius, 99);
    const auto sb = kernels::contour_sum_parallel(b.values, radius, 99);
    for (std::size_t n = 0; n < sa.size(); ++n) REQUIRE(sa[n] == sb[n]);
  }

  TEST_CASE("FFT and direct sums agree") {
    const auto t = lobatto_iiic(4);
    for (double e : {-0.5, 0.5, -1.5}) {
      CAPTURE(e);
      const auto d = compute_weights(t, e, 0.02, 300, with_backend(ContourBackend::kParallel, 8));
      const auto f = compute_weights(t, e, 0.02, 300, with_backend(ContourBackend::kFft, 8));
      const double scale = d.max_norm();
      for (std::size_t n = 0; n < d.count(); ++n) REQUIRE(max_abs(d[n] - f[n]) < 1e-13 * scale);
    }
  }

  TEST_CASE("matrix power matches repeated products and inverses") {
    const auto t = lobatto_iiic(3);
    const kernels::ExtendedMatrix g = gamma(t, {0.4, 0.3}).cast<kernels::ExtendedComplex>();
    const auto sq = kernels::matrix_power(g, 2.0L, 1e12);
    REQUIRE(sq);
    CHECK(static_cast<double>((*sq - g * g).cwiseAbs().maxCoeff()) < 1e-12);
    const auto inv = kernels::matrix_power(g, -1.0L, 1e12);
    REQUIRE(inv);
    CHECK(static_cast<double>((*inv * g - kernels::ExtendedMatrix::Identity(3, 3)).cwiseAbs().maxCoeff()) < 1e-12);
    CHECK_FALSE(kernels::matrix_power(g, 0.5L, 0.5));
  }

  TEST_CASE("semigroup property") {
    for (int r = 2; r <= 3; ++r) {
      const auto t = lobatto_iiic(r);
      for (double e : {-0.25, -0.5}) {
        CAPTURE(r);
        CAPTURE(e);
        const auto half = compute_weights(t, e, 0.05, 32);
        const auto full = compute_weights(t, 2 * e, 0.05, 32);
        const auto conv = oracle::brute_convolve(half.matrices(), half.matrices());
        for (std::size_t n = 0; n < conv.size(); ++n) CHECK(max_abs(conv[n] - full[n]) / full.max_norm() < 1e-7);
      }
    }
  }

  TEST_CASE("integration and derivative weights are inverse to each other") {
    const auto t = lobatto_iiic(3);
    const auto d = compute_weights(t, -0.5, 0.1, 40, with_backend(ContourBackend::kFft));
    const auto j = compute_weights(t, 0.5, 0.1, 40, with_backend(ContourBackend::kFft));
    const auto conv = oracle::brute_convolve(d.matrices(), j.matrices());
    CHECK(max_abs(conv[0] - Eigen::MatrixXd::Identity(3, 3)) < 1e-12);
    for (std::size_t n = 1; n < conv.size(); ++n) CHECK(max_abs(conv[n]) < 1e-11);
  }

  TEST_CASE("asymmetric integration by parts on random instances") {
    std::mt19937_64 rng(2024);
    for (int r = 2; r <= 3; ++r) {
      const auto t = lobatto_iiic(r);
      const auto w = compute_weights(t, -0.5, 0.1, 16);
      for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_trajectory(rng, 3, r, 17, 0.1);
        const auto g = random_trajectory(rng, 3, r, 17, 0.1);
        double lhs = 0, rhs = 0, lhs_b = 0, rhs_b = 0;
        StageTrajectory bf(3, r, 0.1, false);
        for (std::size_t k = 0; k < f.size(); ++k) bf.append(t.b().asDiagonal() * f[k]);
        for (std::size_t k = 0; k <= 16; ++k) {
          const auto adv = apply_advanced(w, g, k);
          lhs += g[k].cwiseProduct(apply_retarded(w, f, k)).sum();
          rhs += adv.cwiseProduct(f[k]).sum();
          lhs_b += g[k].cwiseProduct(apply_retarded(w, bf, k)).sum();
          rhs_b += (t.b().asDiagonal() * adv).cwiseProduct(f[k]).sum();
        }
        CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(lhs)));
        CHECK(std::abs(lhs_b - rhs_b) < 1e-10 * (1 + std::abs(lhs_b)));
      }
    }
  }

  TEST_CASE("retarded sums match the index-by-index oracle") {
    std::mt19937_64 rng(9);
    const auto t = lobatto_iiic(3);
    const auto w = compute_weights(t, -0.5, 0.1, 12);
    const auto f = random_trajectory(rng, 2, 3, 13, 0.1);
    std::vector<Eigen::MatrixXd> blocks;
    for (std::size_t k = 0; k < f.size(); ++k) blocks.push_back(f[k]);
    for (std::size_t k = 0; k <= 12; ++k) {
      const auto full = apply_retarded(w, f, k);
      CHECK(max_abs(full - oracle::brute_retarded(w.matrices(), blocks, k)) < 1e-12);
      CHECK(max_abs(full - (retarded_history(w, f, k) + w[0] * f[k])) < 1e-12);
    }
  }

  TEST_CASE("advanced sum is the transposed retarded sum") {
    std::mt19937_64 rng(4);
    const auto t = lobatto_iiic(2);
    const auto w = compute_weights(t, -0.5, 0.1, 8);
    const auto g = random_trajectory(rng, 1, 2, 9, 0.1);
    for (std::size_t k = 0; k <= 8; ++k) {
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 1);
      for (std::size_t n = k; n <= 8; ++n) expected += w[n - k].transpose() * g[n];
      CHECK(max_abs(apply_advanced(w, g, k) - expected) < 1e-13);
    }
  }

  TEST_CASE("CQ of D^(1/2) t^3 converges") {
    const auto t = lobatto_iiic(2);
    double prev = 0.0;
    for (std::size_t n : {16, 32, 64}) {
      const double h = 1.0 / static_cast<double>(n);
      const auto w = compute_weights(t, -0.5, h, n, with_backend(ContourBackend::kFft));
      StageTrajectory f(1, 2, h, true);
      for (std::size_t k = 0; k < n; ++k) {
        Eigen::MatrixXd b(2, 1);
        for (int i = 0; i < 2; ++i) b(i, 0) = std::pow((k + t.c()(i)) * h, 3);
        f.append(b);
      }
      const double err =
          std::abs(apply_retarded(w, f, n - 1)(1, 0) - oracle::rl_monomial(3, 0.5, 1.0, oracle::RlKind::kDerivative));
      if (prev > 0) CHECK(prev / err > 2.5);
      prev = err;
    }
  }

  TEST_CASE("MIDCQ weights") {
    const auto d = midcq_weights(-1.0, 1.0, 8);
    CHECK(d[0] == doctest::Approx(2.0));
    for (std::size_t n = 1; n <= 8; ++n) CHECK(d[n] == doctest::Approx(n % 2 ? -4.0 : 4.0));
    const auto j = midcq_weights(1.0, 0.5, 8);
    CHECK(j[0] == doctest::Approx(0.25));
    for (std::size_t n = 1; n <= 8; ++n) CHECK(j[n] == doctest::Approx(0.5));
    const auto half = midcq_weights(-0.5, 0.1, 16);
    const auto conv = oracle::brute_convolve(half.w, half.w);
    const auto full = midcq_weights(-1.0, 0.1, 16);
    for (std::size_t n = 0; n <= 16; ++n) CHECK(conv[n] == doctest::Approx(full[n]).epsilon(1e-12));
  }

  TEST_CASE("apply_midcq averages neighbouring nodes") {
    const auto w = midcq_weights(-1.0, 1.0, 4);
    std::vector<Eigen::VectorXd> nodes;
    for (int j = 0; j < 6; ++j) nodes.push_back(Eigen::VectorXd::Constant(1, j * j));
    const auto out = apply_midcq(w, nodes, 3);
    double expected = 0;
    for (std::size_t j = 0; j <= 3; ++j) expected += w[3 - j] * 0.5 * (j * j + (j + 1) * (j + 1));
    CHECK(out(0) == doctest::Approx(expected));
    CHECK(kind_of([&] { (void)apply_midcq(w, std::span(nodes).first(3), 3); }) == ErrorKind::kIndexOutOfRange);
  }

  TEST_CASE("error paths") {
    const auto t = lobatto_iiic(2);
    CHECK(kind_of([&] { (void)compute_weights(t, -0.5, 0.0, 4); }) == ErrorKind::kInvalidArgument);
    ContourOptions o;
    o.oversampling = 0;
    CHECK(kind_of([&] { (void)compute_weights(t, -0.5, 0.1, 4, o); }) == ErrorKind::kInvalidArgument);
    o = {};
    o.eps = 2.0;
    CHECK(kind_of([&] { (void)compute_weights(t, -0.5, 0.1, 4, o); }) == ErrorKind::kInvalidArgument);
    o = {};
    o.radius = 1.5;
    CHECK(kind_of([&] { (void)compute_weights(t, -0.5, 0.1, 4, o); }) == ErrorKind::kInvalidArgument);
    o = {};
    o.max_condition = 0.5;  // no eigenbasis qualifies
    CHECK(kind_of([&] { (void)compute_weights(t, -0.5, 0.1, 4, o); }) == ErrorKind::kContourDegeneracy);
    CHECK(kind_of([] { (void)backend_from_name("gpu"); }) == ErrorKind::kInvalidArgument);
    CHECK(backend_from_name(backend_name(ContourBackend::kFft)) == ContourBackend::kFft);

    const auto w = compute_weights(t, -0.5, 0.1, 4);
    StageTrajectory f3(1, 3, 0.1, false);
    f3.append(Eigen::MatrixXd::Zero(3, 1));
    CHECK(kind_of([&] { (void)apply_retarded(w, f3, 0); }) == ErrorKind::kShapeMismatch);
    StageTrajectory f(1, 2, 0.1, true);
    CHECK(kind_of([&] { (void)apply_retarded(w, f, 0); }) == ErrorKind::kIndexOutOfRange);
    f.append(Eigen::MatrixXd::Zero(2, 1));
    CHECK(kind_of([&] { (void)apply_retarded(w, f, 1); }) == ErrorKind::kIndexOutOfRange);
    CHECK(kind_of([&] { (void)retarded_history(w, f, 3); }) == ErrorKind::kHistoryIncomplete);
    CHECK(kind_of([&] { (void)retarded_history(w, f, 5); }) == ErrorKind::kIndexOutOfRange);
    CHECK(kind_of([&] { (void)apply_advanced(w, f, 1); }) == ErrorKind::kIndexOutOfRange);
    CHECK(kind_of([&] { (void)midcq_weights(-0.5, -1.0, 4); }) == ErrorKind::kInvalidArgument);
  }

  TEST_CASE("stage trajectory invariants") {
    StageTrajectory f(2, 3, 0.1, true);
    Eigen::MatrixXd b = Eigen::MatrixXd::Random(3, 2);
    f.append(b);
    Eigen::MatrixXd next = Eigen::MatrixXd::Random(3, 2);
    CHECK(kind_of([&] { f.append(next); }) == ErrorKind::kInvalidArgument);
    next.row(0) = b.row(2);
    f.append(next);
    CHECK(f.size() == 2);
    CHECK(kind_of([&] { f.append(Eigen::MatrixXd::Zero(2, 2)); }) == ErrorKind::kShapeMismatch);
    CHECK(kind_of([&] { (void)f.block(5); }) == ErrorKind::kIndexOutOfRange);
    CHECK(kind_of([] { StageTrajectory bad(0, 2, 0.1, false); }) == ErrorKind::kInvalidArgument);
  }

  TEST_CASE("weight cache") {
    WeightCache cache;
    const auto t = lobatto_iiic(2);
    const auto a = cache.get(t, -0.5, 0.1, 16);
    const auto b = cache.get(t, -0.5, 0.1, 16);
    CHECK(a.get() == b.get());
    CHECK(cache.misses() == 1);
    (void)cache.get(t, -0.5, 0.1, 16, with_backend(ContourBackend::kFft));
    (void)cache.get(t, -0.5, 0.2, 16);
    CHECK(cache.size() == 3);
    cache.clear();
    CHECK(cache.size() == 0);

    std::vector<std::thread> pool;
    std::vector<std::shared_ptr<const WeightSequence>> got(6);
    for (int i = 0; i < 6; ++i) pool.emplace_back([&, i] { got[i] = cache.get(t, -0.25, 0.05, 64); });
    for (auto& th : pool) th.join();
    CHECK(cache.size() == 1);
    for (const auto& g : got) CHECK(g.get() == got[0].get());
  }

  TEST_CASE("fingerprints distinguish weight sequences") {
    const auto t = lobatto_iiic(2);
    const auto a = compute_weights(t, -0.5, 0.1, 8);
    CHECK(weights_fingerprint(a) == weights_fingerprint(compute_weights(t, -0.5, 0.1, 8)));
    CHECK(weights_fingerprint(a) != weights_fingerprint(compute_weights(t, -0.5, 0.1, 9)));
    CHECK(weights_fingerprint(midcq_weights(-0.5, 0.1, 8)) != weights_fingerprint(midcq_weights(-0.5, 0.2, 8)));
  }
}
