#include "mapfsel/simd/kernels.hpp"

#include <algorithm>

namespace mapfsel::simd {
namespace {

void stencil_step_scalar(const double* cur, double* next, const double* mask,
                         std::size_t width, std::size_t height) {
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t base = r * width;
    const double* row = cur + base;
    const double* up = r > 0 ? cur + base - width : nullptr;
    const double* down = r + 1 < height ? cur + base + width : nullptr;
    for (std::size_t c = 0; c < width; ++c) {
      double s = row[c];
      if (c > 0) s += row[c - 1];
      if (c + 1 < width) s += row[c + 1];
      if (up) s += up[c];
      if (down) s += down[c];
      next[base + c] = s * mask[base + c];
    }
  }
}

void fma_acc_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

void scale_scalar(double* dst, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] *= s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double masked_max_scalar(const double* x, const double* mask, std::size_t n) {
  double m = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] != 0.0) {
      m = any ? std::max(m, x[i]) : x[i];
      any = true;
    }
  }
  return any ? m : 0.0;
}

}  // namespace

const Kernels kScalar = {
    stencil_step_scalar, fma_acc_scalar, scale_scalar,
    dot_scalar,          masked_max_scalar,
    "scalar",
};

}  // namespace mapfsel::simd
