#include "hduva/kernels/kernels.hpp"

#if defined(HDUVA_BUILD_AVX2)

#include <immintrin.h>

#include <vector>

namespace hduva::kernels {
namespace {

constexpr int MR = 4;    // microkernel rows
constexpr int NR = 8;    // microkernel cols (two ymm)
constexpr int KC = 240;  // k blocking
constexpr int NC = 2048; // n blocking

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Packed panels: A strips are MR-high (Ap[k*MR + r]), B strips NR-wide
// (Bp[k*NR + c]); short strips are zero padded.
inline void mk_packed(int kc, const double* Ap, const double* Bp, double* c,
                      int ldc) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  for (int k = 0; k < kc; ++k) {
    const __m256d b0 = _mm256_loadu_pd(Bp + k * NR);
    const __m256d b1 = _mm256_loadu_pd(Bp + k * NR + 4);
    __m256d a;
    a = _mm256_set1_pd(Ap[k * MR + 0]);
    c00 = _mm256_fmadd_pd(a, b0, c00);
    c01 = _mm256_fmadd_pd(a, b1, c01);
    a = _mm256_set1_pd(Ap[k * MR + 1]);
    c10 = _mm256_fmadd_pd(a, b0, c10);
    c11 = _mm256_fmadd_pd(a, b1, c11);
    a = _mm256_set1_pd(Ap[k * MR + 2]);
    c20 = _mm256_fmadd_pd(a, b0, c20);
    c21 = _mm256_fmadd_pd(a, b1, c21);
    a = _mm256_set1_pd(Ap[k * MR + 3]);
    c30 = _mm256_fmadd_pd(a, b0, c30);
    c31 = _mm256_fmadd_pd(a, b1, c31);
  }
  _mm256_storeu_pd(c + 0 * ldc, _mm256_add_pd(_mm256_loadu_pd(c + 0 * ldc), c00));
  _mm256_storeu_pd(c + 0 * ldc + 4,
                   _mm256_add_pd(_mm256_loadu_pd(c + 0 * ldc + 4), c01));
  _mm256_storeu_pd(c + 1 * ldc, _mm256_add_pd(_mm256_loadu_pd(c + 1 * ldc), c10));
  _mm256_storeu_pd(c + 1 * ldc + 4,
                   _mm256_add_pd(_mm256_loadu_pd(c + 1 * ldc + 4), c11));
  _mm256_storeu_pd(c + 2 * ldc, _mm256_add_pd(_mm256_loadu_pd(c + 2 * ldc), c20));
  _mm256_storeu_pd(c + 2 * ldc + 4,
                   _mm256_add_pd(_mm256_loadu_pd(c + 2 * ldc + 4), c21));
  _mm256_storeu_pd(c + 3 * ldc, _mm256_add_pd(_mm256_loadu_pd(c + 3 * ldc), c30));
  _mm256_storeu_pd(c + 3 * ldc + 4,
                   _mm256_add_pd(_mm256_loadu_pd(c + 3 * ldc + 4), c31));
}

// Same kernel into a local tile for edge strips.
inline void mk_packed_tile(int kc, const double* Ap, const double* Bp,
                           double* tile /*MR*NR*/) {
  for (int i = 0; i < MR * NR; ++i) tile[i] = 0.0;
  mk_packed(kc, Ap, Bp, tile, NR);
}

// element accessors for the four layout combinations
struct AccA {
  const double* a;
  long ld;  // row stride of logical A[M,K]
  bool trans;
  inline double at(int i, int k) const {
    return trans ? a[static_cast<long>(k) * ld + i]
                 : a[static_cast<long>(i) * ld + k];
  }
};
struct AccB {
  const double* b;
  long ld;  // row stride of logical B[K,N]
  bool trans;
  inline double at(int k, int j) const {
    return trans ? b[static_cast<long>(j) * ld + k]
                 : b[static_cast<long>(k) * ld + j];
  }
};

// C[M,N] += A*B with blocked packing; deterministic accumulation order
// (ascending k per element) regardless of thread count. Pack buffers are
// thread local and reused across calls.
void gemm_blocked(int M, int N, int K, AccA A, AccB B, double* C) {
  static thread_local std::vector<double> Bp_buf;
  for (int n0 = 0; n0 < N; n0 += NC) {
    const int nc = (N - n0) < NC ? (N - n0) : NC;
    const int n_strips = (nc + NR - 1) / NR;
    for (int k0 = 0; k0 < K; k0 += KC) {
      const int kc = (K - k0) < KC ? (K - k0) : KC;
      const std::size_t need = static_cast<std::size_t>(n_strips) * kc * NR;
      if (Bp_buf.size() < need) Bp_buf.resize(need);
      double* Bp = Bp_buf.data();
      for (int s = 0; s < n_strips; ++s) {
        const int j0 = n0 + s * NR;
        const int w = (N - j0) < NR ? (N - j0) : NR;
        double* dst = Bp + static_cast<std::size_t>(s) * kc * NR;
        if (w == NR) {
          for (int k = 0; k < kc; ++k)
            for (int j = 0; j < NR; ++j) dst[k * NR + j] = B.at(k0 + k, j0 + j);
        } else {
          for (int k = 0; k < kc; ++k)
            for (int j = 0; j < NR; ++j)
              dst[k * NR + j] = j < w ? B.at(k0 + k, j0 + j) : 0.0;
        }
      }
      const int m_strips = (M + MR - 1) / MR;
#pragma omp parallel for schedule(static)
      for (int ms = 0; ms < m_strips; ++ms) {
        static thread_local std::vector<double> Ap_buf;
        if (Ap_buf.size() < static_cast<std::size_t>(KC) * MR)
          Ap_buf.resize(static_cast<std::size_t>(KC) * MR);
        double* Ap = Ap_buf.data();
        alignas(32) double tile[MR * NR];
        const int i0 = ms * MR;
        const int rows = (M - i0) < MR ? (M - i0) : MR;
        for (int k = 0; k < kc; ++k)
          for (int r = 0; r < MR; ++r)
            Ap[static_cast<std::size_t>(k) * MR + r] =
                r < rows ? A.at(i0 + r, k0 + k) : 0.0;
        for (int s = 0; s < n_strips; ++s) {
          const int j0 = n0 + s * NR;
          const int w = (N - j0) < NR ? (N - j0) : NR;
          const double* bp = Bp + static_cast<std::size_t>(s) * kc * NR;
          if (rows == MR && w == NR) {
            mk_packed(kc, Ap, bp, C + static_cast<long>(i0) * N + j0, N);
          } else {
            mk_packed_tile(kc, Ap, bp, tile);
            for (int r = 0; r < rows; ++r)
              for (int j = 0; j < w; ++j)
                C[static_cast<long>(i0 + r) * N + j0 + j] += tile[r * NR + j];
          }
        }
      }
    }
  }
}

void gemm_nn_avx2(int M, int N, int K, const double* A, const double* B,
                  double* C) {
  gemm_blocked(M, N, K, {A, K, false}, {B, N, false}, C);
}

void gemm_nt_avx2(int M, int N, int K, const double* A, const double* B,
                  double* C) {
  // B stored as [N,K]
  gemm_blocked(M, N, K, {A, K, false}, {B, K, true}, C);
}

void gemm_tn_avx2(int M, int N, int K, const double* A, const double* B,
                  double* C) {
  // A stored as [K,M]
  gemm_blocked(M, N, K, {A, M, true}, {B, N, false}, C);
}

void axpy_avx2(int n, double a, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(int n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double reduce_sum_avx2(int n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void pairwise_sqdist_avx2(int M, int N, int D, const double* X,
                          const double* Y, double* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    const double* xi = X + static_cast<long>(i) * D;
    double* oi = out + static_cast<long>(i) * N;
    for (int j = 0; j < N; ++j) {
      const double* yj = Y + static_cast<long>(j) * D;
      __m256d acc = _mm256_setzero_pd();
      int d = 0;
      for (; d + 4 <= D; d += 4) {
        const __m256d t =
            _mm256_sub_pd(_mm256_loadu_pd(xi + d), _mm256_loadu_pd(yj + d));
        acc = _mm256_fmadd_pd(t, t, acc);
      }
      double s = hsum(acc);
      for (; d < D; ++d) {
        const double t = xi[d] - yj[d];
        s += t * t;
      }
      oi[j] = s;
    }
  }
}

}  // namespace

const Ops avx2_ops = {gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2,
                      axpy_avx2,    dot_avx2,     reduce_sum_avx2,
                      pairwise_sqdist_avx2};

}  // namespace hduva::kernels

#endif  // HDUVA_BUILD_AVX2
