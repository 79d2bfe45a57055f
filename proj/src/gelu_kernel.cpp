#include "gelu_kernel.hpp"

#include <cmath>

namespace oceannet::detail {

void gelu_kernel(const double* x, double* out, double* slope, std::size_t n) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    const double cdf = 0.5 * std::erfc(-v * inv_sqrt2);
    slope[i] = cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
    out[i] = v * cdf;
  }
}

}  // namespace oceannet::detail
