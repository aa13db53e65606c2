#pragma once

// Data-parallel arithmetic kernels used by the tensor and kernel-method code.
// Two lanes: a scalar reference implementation and an AVX2/FMA variant.
// The active lane is picked once at startup from cpuid, overridable with
// HDUVA_KERNELS=scalar|avx2 (and with set_lane() from tests).
//
// All kernels are deterministic for a fixed lane: every output element is
// accumulated in a fixed order regardless of thread count.

namespace hduva::kernels {

enum class Lane { scalar, avx2 };

struct Ops {
  // C[M,N] += A[M,K] * B[K,N], row-major.
  void (*gemm_nn)(int M, int N, int K, const double* A, const double* B,
                  double* C);
  // C[M,N] += A[M,K] * B[N,K]^T, row-major (B stored transposed).
  void (*gemm_nt)(int M, int N, int K, const double* A, const double* B,
                  double* C);
  // C[M,N] += A[K,M]^T * B[K,N], row-major (A stored transposed).
  void (*gemm_tn)(int M, int N, int K, const double* A, const double* B,
                  double* C);
  void (*axpy)(int n, double a, const double* x, double* y);
  double (*dot)(int n, const double* x, const double* y);
  double (*reduce_sum)(int n, const double* x);
  // out[i*N+j] = sum_d (X[i*D+d] - Y[j*D+d])^2
  void (*pairwise_sqdist)(int M, int N, int D, const double* X,
                          const double* Y, double* out);
};

const Ops& active();
Lane active_lane();
const char* lane_name(Lane l);

// Test hook; not thread safe while kernels are in flight.
void set_lane(Lane l);

bool cpu_has_avx2();
bool built_with_avx2();

extern const Ops scalar_ops;
#if defined(HDUVA_BUILD_AVX2)
extern const Ops avx2_ops;
#endif

}  // namespace hduva::kernels
