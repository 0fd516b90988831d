#pragma once
// Data-parallel inner loops shared by the walk-count DP and the tensor
// pipeline. Scalar reference kernels always exist; an AVX2 variant is
// selected at runtime when the CPU supports it. The two variants are
// equivalence-tested against each other (see tests/test_simd.cpp).

#include <cstddef>

namespace mapfsel::simd {

struct Kernels {
  // next[i] = (cur[i] + cur[left] + cur[right] + cur[up] + cur[down]) * mask[i]
  // over a width x height row-major grid; out-of-bounds neighbors contribute 0.
  // mask is 1.0 on passable cells, 0.0 on blocked ones.
  void (*stencil_step)(const double* cur, double* next, const double* mask,
                       std::size_t width, std::size_t height);
  // dst[i] += a[i] * b[i]
  void (*fma_acc)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[i] *= s
  void (*scale)(double* dst, double s, std::size_t n);
  // sum of a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // max of x[i] over cells with mask[i] != 0; returns 0 if no such cell
  double (*masked_max)(const double* x, const double* mask, std::size_t n);

  const char* name;
};

// Scalar reference implementations (always available).
extern const Kernels kScalar;

#if defined(MAPFSEL_HAVE_AVX2_KERNELS)
extern const Kernels kAvx2;
#endif

// Best kernels for the running CPU, chosen once at startup.
const Kernels& active();

// Force a specific variant (tests); returns false if unavailable.
bool set_active(const char* name);

}  // namespace mapfsel::simd
