#include "hduva/kernels/kernels.hpp"

namespace hduva::kernels {
namespace {

void gemm_nn_scalar(int M, int N, int K, const double* A, const double* B,
                    double* C) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    double* ci = C + static_cast<long>(i) * N;
    const double* ai = A + static_cast<long>(i) * K;
    for (int k = 0; k < K; ++k) {
      const double a = ai[k];
      if (a == 0.0) continue;
      const double* bk = B + static_cast<long>(k) * N;
      for (int j = 0; j < N; ++j) ci[j] += a * bk[j];
    }
  }
}

void gemm_nt_scalar(int M, int N, int K, const double* A, const double* B,
                    double* C) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    const double* ai = A + static_cast<long>(i) * K;
    double* ci = C + static_cast<long>(i) * N;
    for (int j = 0; j < N; ++j) {
      const double* bj = B + static_cast<long>(j) * K;
      double acc = 0.0;
      for (int k = 0; k < K; ++k) acc += ai[k] * bj[k];
      ci[j] += acc;
    }
  }
}

void gemm_tn_scalar(int M, int N, int K, const double* A, const double* B,
                    double* C) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    double* ci = C + static_cast<long>(i) * N;
    for (int k = 0; k < K; ++k) {
      const double a = A[static_cast<long>(k) * M + i];
      if (a == 0.0) continue;
      const double* bk = B + static_cast<long>(k) * N;
      for (int j = 0; j < N; ++j) ci[j] += a * bk[j];
    }
  }
}

void axpy_scalar(int n, double a, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(int n, const double* x, const double* y) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double reduce_sum_scalar(int n, const double* x) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void pairwise_sqdist_scalar(int M, int N, int D, const double* X,
                            const double* Y, double* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    const double* xi = X + static_cast<long>(i) * D;
    double* oi = out + static_cast<long>(i) * N;
    for (int j = 0; j < N; ++j) {
      const double* yj = Y + static_cast<long>(j) * D;
      double acc = 0.0;
      for (int d = 0; d < D; ++d) {
        const double t = xi[d] - yj[d];
        acc += t * t;
      }
      oi[j] = acc;
    }
  }
}

}  // namespace

const Ops scalar_ops = {gemm_nn_scalar, gemm_nt_scalar, gemm_tn_scalar,
                        axpy_scalar,    dot_scalar,     reduce_sum_scalar,
                        pairwise_sqdist_scalar};

}  // namespace hduva::kernels
