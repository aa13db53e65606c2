#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hduva/core/rng.hpp"
#include "hduva/core/tensor.hpp"
#include "hduva/kernels/kernels.hpp"
#include "test_util.hpp"

using namespace hduva;
using testutil::random_tensor;

namespace {

// Plain triple-loop oracle, independent of both lanes.
void gemm_oracle(int M, int N, int K, const double* A, const double* B,
                 double* C) {
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) {
      double acc = 0.0;
      for (int k = 0; k < K; ++k) acc += A[i * K + k] * B[k * N + j];
      C[i * N + j] += acc;
    }
}

std::vector<kernels::Lane> lanes_under_test() {
  std::vector<kernels::Lane> lanes = {kernels::Lane::scalar};
  if (kernels::built_with_avx2() && kernels::cpu_has_avx2())
    lanes.push_back(kernels::Lane::avx2);
  return lanes;
}

struct LaneGuard {
  kernels::Lane saved;
  LaneGuard() : saved(kernels::active_lane()) {}
  ~LaneGuard() { kernels::set_lane(saved); }
};

}  // namespace

TEST_CASE("gemm variants match the triple-loop oracle on every lane") {
  Rng rng(11);
  LaneGuard guard;
  for (auto lane : lanes_under_test()) {
    kernels::set_lane(lane);
    for (int trial = 0; trial < 20; ++trial) {
      const int M = 1 + static_cast<int>(rng.below(17));
      const int N = 1 + static_cast<int>(rng.below(33));
      const int K = 1 + static_cast<int>(rng.below(25));
      Tensor A = random_tensor({M, K}, rng);
      Tensor B = random_tensor({K, N}, rng);
      Tensor want({M, N}), got({M, N});
      gemm_oracle(M, N, K, A.data(), B.data(), want.data());

      kernels::active().gemm_nn(M, N, K, A.data(), B.data(), got.data());
      CHECK(testutil::max_abs_diff(got, want) < 1e-12);

      // nt: B stored as [N,K]
      Tensor Bt({N, K});
      for (int k = 0; k < K; ++k)
        for (int j = 0; j < N; ++j) Bt.at(j, k) = B.at(k, j);
      got.fill(0.0);
      kernels::active().gemm_nt(M, N, K, A.data(), Bt.data(), got.data());
      CHECK(testutil::max_abs_diff(got, want) < 1e-12);

      // tn: A stored as [K,M]
      Tensor At({K, M});
      for (int i = 0; i < M; ++i)
        for (int k = 0; k < K; ++k) At.at(k, i) = A.at(i, k);
      got.fill(0.0);
      kernels::active().gemm_tn(M, N, K, At.data(), B.data(), got.data());
      CHECK(testutil::max_abs_diff(got, want) < 1e-12);
    }
  }
}

TEST_CASE("lanes agree with each other") {
  if (lanes_under_test().size() < 2) return;
  Rng rng(12);
  LaneGuard guard;
  const int M = 37, N = 53, K = 29;
  Tensor A = random_tensor({M, K}, rng);
  Tensor B = random_tensor({K, N}, rng);

  kernels::set_lane(kernels::Lane::scalar);
  Tensor c1({M, N});
  kernels::active().gemm_nn(M, N, K, A.data(), B.data(), c1.data());
  const double s1 = kernels::active().reduce_sum(static_cast<int>(c1.size()), c1.data());

  kernels::set_lane(kernels::Lane::avx2);
  Tensor c2({M, N});
  kernels::active().gemm_nn(M, N, K, A.data(), B.data(), c2.data());
  const double s2 = kernels::active().reduce_sum(static_cast<int>(c2.size()), c2.data());

  CHECK(testutil::max_abs_diff(c1, c2) < 1e-12);
  CHECK(std::fabs(s1 - s2) < 1e-10);
}

TEST_CASE("axpy, dot, reduce_sum, pairwise_sqdist against plain loops") {
  Rng rng(13);
  LaneGuard guard;
  for (auto lane : lanes_under_test()) {
    kernels::set_lane(lane);
    const int n = 103;
    Tensor x = random_tensor({n}, rng), y = random_tensor({n}, rng);
    Tensor y2 = y.clone();
    kernels::active().axpy(n, 0.37, x.data(), y2.data());
    for (int i = 0; i < n; ++i)
      CHECK(y2[i] == doctest::Approx(y[i] + 0.37 * x[i]).epsilon(1e-14));

    double want_dot = 0.0, want_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      want_dot += x[i] * y[i];
      want_sum += x[i];
    }
    CHECK(std::fabs(kernels::active().dot(n, x.data(), y.data()) - want_dot) < 1e-12);
    CHECK(std::fabs(kernels::active().reduce_sum(n, x.data()) - want_sum) < 1e-12);

    const int M = 7, N = 9, D = 13;
    Tensor X = random_tensor({M, D}, rng), Y = random_tensor({N, D}, rng);
    Tensor got({M, N});
    kernels::active().pairwise_sqdist(M, N, D, X.data(), Y.data(), got.data());
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < N; ++j) {
        double acc = 0.0;
        for (int d = 0; d < D; ++d) {
          const double t = X.at(i, d) - Y.at(j, d);
          acc += t * t;
        }
        CHECK(got.at(i, j) == doctest::Approx(acc).epsilon(1e-13));
      }
  }
}
