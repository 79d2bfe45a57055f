#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "oceannet/errors.hpp"
#include "oceannet/tensor.hpp"

namespace oceannet::qg {

/// Raised when a step would violate the advective CFL bound.
class StepSizeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Doubly periodic barotropic vorticity model on an H x W grid spanning
/// [0, 2*pi) x [0, 2*pi*H/W), so both grid spacings are 2*pi/W.
struct Params {
  std::size_t height = 64;
  std::size_t width = 64;
  double dt = 0.05;
  double hyperviscosity = 1e-9;  // coefficient of the del^8 damping
  double drag = 0.0;             // linear (bottom) drag
  double beta = 0.0;             // planetary vorticity gradient
  double forcing_amplitude = 0.0;
  double forcing_k_min = 0.0;  // forcing band in |k|
  double forcing_k_max = 0.0;
  double forcing_tau = 1.0;  // forcing decorrelation time
  double cfl_max = 1.0;

  void validate() const;
};

/// Spectral state and stepper. The state is the 2/3-dealiased vorticity
/// transform (complex, row-major H x W, unnormalized forward DFT).
class Solver {
 public:
  Solver(const Params& p, std::uint64_t seed);

  /// Replace the vorticity with a physical-space field [H,W] (mean removed,
  /// dealiased).
  void set_vorticity(const Tensor& zeta);
  Tensor vorticity() const;
  Tensor streamfunction() const;

  /// One integrating-factor RK4 step of
  ///   d(zeta)/dt = -J(psi, zeta) - beta v - drag zeta - nu del^8 zeta + F.
  /// Throws StepSizeError when max|u| dt / dx exceeds cfl_max.
  void step();

  /// 0.5 * mean |grad psi|^2 and 0.5 * mean zeta^2.
  double energy() const;
  double enstrophy() const;
  double max_speed() const;
  double time() const { return time_; }
  const Params& params() const { return p_; }

 private:
  std::vector<cplx> rhs(const std::vector<cplx>& zh) const;
  // Ornstein-Uhlenbeck update; `fresh` draws from the stationary law.
  void update_forcing(bool fresh);

  Params p_;
  std::mt19937_64 rng_;
  std::vector<double> kx_, ky_, k2_;
  std::vector<std::uint8_t> keep_;  // 2/3-rule dealias mask
  std::vector<double> decay_half_;  // exp(-L dt/2)
  std::vector<cplx> zeta_hat_;
  std::vector<cplx> forcing_hat_;
  std::vector<std::size_t> band_;  // forcing modes with a positive-half representative
  double time_ = 0.0;
};

/// Random band-limited initial vorticity with the given rms.
Tensor random_vorticity(std::size_t height, std::size_t width, double k_peak, double rms,
                        std::mt19937_64& rng);

}  // namespace oceannet::qg
