#include "mapfsel/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace mapfsel::simd {
namespace {

const Kernels* detect() {
  if (const char* force = std::getenv("MAPFSEL_FORCE_SCALAR");
      force && std::strcmp(force, "0") != 0)
    return &kScalar;
#if defined(MAPFSEL_HAVE_AVX2_KERNELS)
  if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
  return &kScalar;
}

const Kernels*& slot() {
  static const Kernels* k = detect();
  return k;
}

}  // namespace

const Kernels& active() { return *slot(); }

bool set_active(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    slot() = &kScalar;
    return true;
  }
#if defined(MAPFSEL_HAVE_AVX2_KERNELS)
  if (std::strcmp(name, "avx2") == 0 && __builtin_cpu_supports("avx2")) {
    slot() = &kAvx2;
    return true;
  }
#endif
  return false;
}

}  // namespace mapfsel::simd
