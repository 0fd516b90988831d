#include "mapfsel/simd/kernels.hpp"

#if defined(MAPFSEL_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <algorithm>

namespace mapfsel::simd {
namespace {

void stencil_step_avx2(const double* cur, double* next, const double* mask,
                       std::size_t width, std::size_t height) {
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t base = r * width;
    const double* row = cur + base;
    const double* up = r > 0 ? cur + base - width : nullptr;
    const double* down = r + 1 < height ? cur + base + width : nullptr;

    auto scalar_at = [&](std::size_t c) {
      double s = row[c];
      if (c > 0) s += row[c - 1];
      if (c + 1 < width) s += row[c + 1];
      if (up) s += up[c];
      if (down) s += down[c];
      next[base + c] = s * mask[base + c];
    };

    if (width < 6) {
      for (std::size_t c = 0; c < width; ++c) scalar_at(c);
      continue;
    }
    scalar_at(0);
    std::size_t c = 1;
    // interior columns: left/right shifts are plain unaligned loads
    for (; c + 4 < width; c += 4) {
      __m256d s = _mm256_loadu_pd(row + c);
      s = _mm256_add_pd(s, _mm256_loadu_pd(row + c - 1));
      s = _mm256_add_pd(s, _mm256_loadu_pd(row + c + 1));
      if (up) s = _mm256_add_pd(s, _mm256_loadu_pd(up + c));
      if (down) s = _mm256_add_pd(s, _mm256_loadu_pd(down + c));
      s = _mm256_mul_pd(s, _mm256_loadu_pd(mask + base + c));
      _mm256_storeu_pd(next + base + c, s);
    }
    for (; c < width; ++c) scalar_at(c);
  }
}

void fma_acc_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_loadu_pd(dst + i);
    d = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), d);
    _mm256_storeu_pd(dst + i, d);
  }
  for (; i < n; ++i) dst[i] += a[i] * b[i];
}

void scale_avx2(double* dst, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(dst + i), vs));
  for (; i < n; ++i) dst[i] *= s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double masked_max_avx2(const double* x, const double* mask, std::size_t n) {
  // masked cells replaced by -inf; empty mask handled by the scalar tail logic
  const __m256d ninf = _mm256_set1_pd(-__builtin_huge_val());
  const __m256d zero = _mm256_setzero_pd();
  __m256d best = ninf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(mask + i), zero, _CMP_NEQ_OQ);
    __m256d v = _mm256_blendv_pd(ninf, _mm256_loadu_pd(x + i), m);
    best = _mm256_max_pd(best, v);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  bool any = m != -__builtin_huge_val();
  for (; i < n; ++i) {
    if (mask[i] != 0.0) {
      m = any ? std::max(m, x[i]) : x[i];
      any = true;
    }
  }
  return any ? m : 0.0;
}

}  // namespace

const Kernels kAvx2 = {
    stencil_step_avx2, fma_acc_avx2, scale_avx2, dot_avx2, masked_max_avx2,
    "avx2",
};

}  // namespace mapfsel::simd

#endif  // MAPFSEL_HAVE_AVX2_KERNELS
