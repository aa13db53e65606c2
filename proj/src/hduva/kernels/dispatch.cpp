#include "hduva/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

#if defined(__x86_64__) || defined(_M_X64)
#include <cpuid.h>
#endif

namespace hduva::kernels {
namespace {

Lane g_lane = Lane::scalar;

Lane pick_lane() {
  const char* env = std::getenv("HDUVA_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Lane::scalar;
#if defined(HDUVA_BUILD_AVX2)
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Lane::avx2;
#endif
  }
#if defined(HDUVA_BUILD_AVX2)
  if (cpu_has_avx2()) return Lane::avx2;
#endif
  return Lane::scalar;
}

struct Init {
  Init() { g_lane = pick_lane(); }
};
Init g_init;

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  unsigned int eax = 0, ebx = 0, ecx = 0, edx = 0;
  if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
  const bool avx2 = (ebx & (1u << 5)) != 0;
  __get_cpuid(1, &eax, &ebx, &ecx, &edx);
  const bool fma = (ecx & (1u << 12)) != 0;
  return avx2 && fma;
#else
  return false;
#endif
}

bool built_with_avx2() {
#if defined(HDUVA_BUILD_AVX2)
  return true;
#else
  return false;
#endif
}

const Ops& active() {
#if defined(HDUVA_BUILD_AVX2)
  if (g_lane == Lane::avx2) return avx2_ops;
#endif
  return scalar_ops;
}

Lane active_lane() { return g_lane; }

const char* lane_name(Lane l) {
  return l == Lane::avx2 ? "avx2" : "scalar";
}

void set_lane(Lane l) {
#if !defined(HDUVA_BUILD_AVX2)
  l = Lane::scalar;
#else
  if (l == Lane::avx2 && !cpu_has_avx2()) l = Lane::scalar;
#endif
  g_lane = l;
}

}  // namespace hduva::kernels
