#pragma once

#include <span>

#include "oceannet/autodiff.hpp"

namespace oceannet::ad {

// Elementwise arithmetic on equal shapes and dtypes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// Real elementwise product.
Var mul(const Var& a, const Var& b);
/// Complex elementwise product.
Var cmul(const Var& a, const Var& b);

/// Sum of all elements of a real tensor, shape [1].
Var sum(const Var& a);
/// Sum of squares of a real tensor, shape [1].
Var sum_squares(const Var& a);

Var reshape(const Var& a, Shape shape);
/// Contiguous range [start, start+count) of a rank-1 real tensor.
Var slice(const Var& a, std::size_t start, std::size_t count);
/// Stack rank-3 tensors [C_i,H,W] along the channel axis.
Var concat_channels(std::span<const Var> parts);

/// out[c,i,j] = sum_k w[c,k] x[k,i,j] + b[c]; a pointwise (1x1) convolution.
Var channel_mix(const Var& x, const Var& w, const Var& b);

/// Elementwise GELU, x * Phi(x) with the exact normal CDF.
Var gelu(const Var& x);

/// x * mask + fill * (1 - mask); mask is a constant 0/1 field [H,W]
/// broadcast over any leading axes of x.
Var apply_mask(const Var& x, const Tensor& mask, double fill);

Var to_complex(const Var& x);
Var real_part(const Var& z);

/// Unnormalized forward 2D DFT over the last two axes of a complex tensor.
Var fft2(const Var& z);
/// Inverse 2D DFT including the 1/(H*W) factor.
Var ifft2(const Var& z);

}  // namespace oceannet::ad
