#pragma once

#include <cstddef>
#include <span>

#include "oceannet/tensor.hpp"

namespace oceannet::fft {

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place unnormalized radix-2 DFT of a power-of-two length sequence.
/// Forward uses exp(-2*pi*i*k*n/N); inverse uses the positive sign and no 1/N.
void transform(std::span<cplx> data, bool inverse);

/// In-place unnormalized 2D DFT of a row-major rows x cols plane.
void transform2d(std::span<cplx> plane, std::size_t rows, std::size_t cols, bool inverse);

/// Throws ConfigError unless n is a power of two.
void require_pow2(std::size_t n, const char* what);

}  // namespace oceannet::fft
