#pragma once

#include <cstddef>
#include <vector>

#include "oceannet/autodiff.hpp"

namespace oceannet {

/// Retained Fourier modes per axis: signed wavenumbers with |k| < kmax survive.
/// kmax ranges over [1, N/2 + 1]; kmax = N/2 + 1 keeps every mode including
/// the Nyquist row/column.
struct ModeWindow {
  std::size_t kmax_x = 16;
  std::size_t kmax_y = 16;

  /// Throws ConfigError unless the window fits an H x W grid.
  void validate(std::size_t height, std::size_t width) const;
  static ModeWindow full(std::size_t height, std::size_t width) {
    return {width / 2 + 1, height / 2 + 1};
  }
  bool operator==(const ModeWindow&) const = default;
};

/// Latitude-averaged zonal magnitude spectrum, indexed by k_x = 0..W/2.
struct SpectrumProfile {
  std::vector<double> values;
  std::size_t grid_width = 0;
};

/// Unshifted row indices r with min(r, H - r) < kmax_y, ascending.
std::vector<std::size_t> retained_rows(std::size_t height, std::size_t kmax_y);

/// Number of retained k_x >= 0 columns, min(kmax_x, W/2 + 1).
std::size_t retained_cols(std::size_t width, std::size_t kmax_x);

/// S(k) = (1/H) sum_rows |DFT_row(f)[k]| for a real [H,W] field.
SpectrumProfile zonal_spectrum(const Tensor& field);

namespace ad {

/// Zero every coefficient outside the window (corner blocks of the unshifted
/// layout). Input is complex [..., H, W].
Var truncate_modes(const Var& spectrum, const ModeWindow& window);

/// Differentiable zonal spectrum of a real [H,W] field, shape [W/2+1].
Var zonal_spectrum(const Var& field);

/// Fourier-layer kernel: real [Cin,H,W] -> real [Cout,H,W].
///
/// Computes Re(ifft2(Wt * truncate(fft2(x)))) where the complex weights
/// `weights` [Cout,Cin,n_rows,n_cols] give the multiplier for every retained
/// (k_y, k_x >= 0) mode (rows ordered as retained_rows) and negative k_x modes
/// use the Hermitian mirror conj(W(-k_y, -k_x)). Retained modes are summed per
/// output channel over input channels. Evaluated with truncated DFT matrices.
Var spectral_conv(const Var& x, const Var& weights, const ModeWindow& window);

}  // namespace ad
}  // namespace oceannet
