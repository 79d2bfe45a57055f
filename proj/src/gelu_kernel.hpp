#pragma once

#include <cstddef>

namespace oceannet::detail {

/// out[i] = x Phi(x), slope[i] = Phi(x) + x phi(x) with Phi the standard
/// normal CDF.
void gelu_kernel(const double* x, double* out, double* slope, std::size_t n);

}  // namespace oceannet::detail
