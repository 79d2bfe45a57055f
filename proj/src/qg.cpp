#include "oceannet/qg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "oceannet/fft.hpp"
#include "oceannet/random.hpp"

namespace oceannet::qg {

namespace {

constexpr cplx kI{0.0, 1.0};

std::vector<double> to_physical(std::vector<cplx> spec, std::size_t h, std::size_t w) {
  fft::transform2d(spec, h, w, true);
  const double inv = 1.0 / static_cast<double>(h * w);
  std::vector<double> out(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i].real() * inv;
  return out;
}

std::vector<cplx> to_spectral(std::span<const double> f, std::size_t h, std::size_t w) {
  std::vector<cplx> spec(f.begin(), f.end());
  fft::transform2d(spec, h, w, false);
  return spec;
}

long signed_index(std::size_t i, std::size_t n) {
  return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

}  // namespace

void Params::validate() const {
  fft::require_pow2(height, "qg grid height");
  fft::require_pow2(width, "qg grid width");
  if (height < 4 || width < 4) throw ConfigError("qg: grid must be at least 4x4");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("qg: dt must be positive");
  if (hyperviscosity < 0.0 || drag < 0.0) throw ConfigError("qg: damping coefficients must be >= 0");
  if (forcing_amplitude < 0.0) throw ConfigError("qg: forcing amplitude must be >= 0");
  if (forcing_amplitude > 0.0 && !(forcing_k_max >= forcing_k_min && forcing_k_max > 0.0)) {
    throw ConfigError("qg: forcing band must satisfy 0 < k_min <= k_max");
  }
  if (!(forcing_tau > 0.0)) throw ConfigError("qg: forcing_tau must be positive");
  if (!(cfl_max > 0.0)) throw ConfigError("qg: cfl_max must be positive");
}

Solver::Solver(const Params& p, std::uint64_t seed) : p_(p), rng_(seed) {
  p_.validate();
  const std::size_t h = p_.height, w = p_.width, n = h * w;
  const double ky_unit = static_cast<double>(w) / static_cast<double>(h);
  kx_.resize(n);
  ky_.resize(n);
  k2_.resize(n);
  keep_.resize(n);
  decay_half_.resize(n);
  for (std::size_t r = 0; r < h; ++r) {
    const long nr = signed_index(r, h);
    for (std::size_t c = 0; c < w; ++c) {
      const long mc = signed_index(c, w);
      const std::size_t i = r * w + c;
      kx_[i] = static_cast<double>(mc);
      ky_[i] = static_cast<double>(nr) * ky_unit;
      k2_[i] = kx_[i] * kx_[i] + ky_[i] * ky_[i];
      keep_[i] = 3 * static_cast<std::size_t>(std::abs(mc)) < w &&
                 3 * static_cast<std::size_t>(std::abs(nr)) < h;
      const double lin = p_.hyperviscosity * std::pow(k2_[i], 4) + p_.drag;
      decay_half_[i] = std::exp(-lin * p_.dt / 2.0);
    }
  }
  zeta_hat_.assign(n, {});
  forcing_hat_.assign(n, {});
  if (p_.forcing_amplitude > 0.0) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t i = r * w + c;
        const double k = std::sqrt(k2_[i]);
        if (!keep_[i] || k < p_.forcing_k_min || k > p_.forcing_k_max || k2_[i] == 0.0) continue;
        const long mc = signed_index(c, w), nr = signed_index(r, h);
        if (mc > 0 || (mc == 0 && nr > 0)) band_.push_back(i);
      }
    }
    if (band_.empty()) throw ConfigError("qg: forcing band contains no resolved modes");
    update_forcing(true);
  }
}

void Solver::update_forcing(bool fresh) {
  if (band_.empty()) return;
  const std::size_t h = p_.height, w = p_.width;
  const double a = fresh ? 0.0 : std::exp(-p_.dt / p_.forcing_tau);
  const double mode_std = p_.forcing_amplitude * static_cast<double>(h * w) /
                          std::sqrt(2.0 * static_cast<double>(band_.size()));
  const double noise = mode_std * std::sqrt((1.0 - a * a) / 2.0);
  for (std::size_t i : band_) {
    const double re = standard_normal(rng_), im = standard_normal(rng_);
    const cplx v = a * forcing_hat_[i] + noise * cplx{re, im};
    forcing_hat_[i] = v;
    const std::size_t r = i / w, c = i % w;
    forcing_hat_[((h - r) % h) * w + (w - c) % w] = std::conj(v);
  }
}

void Solver::set_vorticity(const Tensor& zeta) {
  require_real(zeta, "qg::set_vorticity");
  if (zeta.shape() != Shape{p_.height, p_.width}) {
    throw DimensionError("qg::set_vorticity: expected " + std::to_string(p_.height) + "x" +
                         std::to_string(p_.width) + ", got " + shape_str(zeta.shape()));
  }
  zeta_hat_ = to_spectral(zeta.real(), p_.height, p_.width);
  for (std::size_t i = 0; i < zeta_hat_.size(); ++i)
    if (!keep_[i] || k2_[i] == 0.0) zeta_hat_[i] = {};
}

Tensor Solver::vorticity() const {
  return Tensor::from({p_.height, p_.width}, to_physical(zeta_hat_, p_.height, p_.width));
}

Tensor Solver::streamfunction() const {
  std::vector<cplx> psi(zeta_hat_.size());
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (k2_[i] > 0.0) psi[i] = -zeta_hat_[i] / k2_[i];
  return Tensor::from({p_.height, p_.width}, to_physical(std::move(psi), p_.height, p_.width));
}

std::vector<cplx> Solver::rhs(const std::vector<cplx>& zh) const {
  const std::size_t h = p_.height, w = p_.width, n = h * w;
  std::vector<cplx> u(n), v(n), zx(n), zy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx psi = k2_[i] > 0.0 ? -zh[i] / k2_[i] : cplx{};
    u[i] = -kI * ky_[i] * psi;
    v[i] = kI * kx_[i] * psi;
    zx[i] = kI * kx_[i] * zh[i];
    zy[i] = kI * ky_[i] * zh[i];
  }
  const auto up = to_physical(u, h, w), vp = to_physical(v, h, w);
  const auto zxp = to_physical(std::move(zx), h, w), zyp = to_physical(std::move(zy), h, w);
  std::vector<double> adv(n);
  for (std::size_t i = 0; i < n; ++i) adv[i] = up[i] * zxp[i] + vp[i] * zyp[i];
  auto out = to_spectral(adv, h, w);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = keep_[i] ? -out[i] - p_.beta * v[i] + forcing_hat_[i] : cplx{};
  }
  return out;
}

double Solver::max_speed() const {
  const std::size_t h = p_.height, w = p_.width, n = h * w;
  std::vector<cplx> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx psi = k2_[i] > 0.0 ? -zeta_hat_[i] / k2_[i] : cplx{};
    u[i] = -kI * ky_[i] * psi;
    v[i] = kI * kx_[i] * psi;
  }
  const auto up = to_physical(std::move(u), h, w), vp = to_physical(std::move(v), h, w);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(up[i]) + std::abs(vp[i]));
  return m;
}

void Solver::step() {
  const double dx = 2.0 * std::numbers::pi / static_cast<double>(p_.width);
  const double courant = max_speed() * p_.dt / dx;
  if (!std::isfinite(courant) || courant > p_.cfl_max) {
    throw StepSizeError("qg: CFL number " + std::to_string(courant) + " exceeds " +
                        std::to_string(p_.cfl_max) + " at t = " + std::to_string(time_) +
                        "; reduce dt");
  }
  const std::size_t n = zeta_hat_.size();
  const double dt = p_.dt;
  const auto& e = decay_half_;
  const auto& z = zeta_hat_;
  std::vector<cplx> stage(n);

  auto a = rhs(z);
  for (std::size_t i = 0; i < n; ++i) stage[i] = e[i] * (z[i] + 0.5 * dt * a[i]);
  auto b = rhs(stage);
  for (std::size_t i = 0; i < n; ++i) stage[i] = e[i] * z[i] + 0.5 * dt * b[i];
  auto c = rhs(stage);
  for (std::size_t i = 0; i < n; ++i) stage[i] = e[i] * e[i] * z[i] + dt * e[i] * c[i];
  auto d = rhs(stage);
  for (std::size_t i = 0; i < n; ++i) {
    const double e2 = e[i] * e[i];
    zeta_hat_[i] = e2 * z[i] + dt / 6.0 * (e2 * a[i] + 2.0 * e[i] * (b[i] + c[i]) + d[i]);
  }
  time_ += dt;
  update_forcing(false);
}

double Solver::energy() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < zeta_hat_.size(); ++i)
    if (k2_[i] > 0.0) acc += std::norm(zeta_hat_[i]) / k2_[i];
  const double n = static_cast<double>(zeta_hat_.size());
  return 0.5 * acc / (n * n);
}

double Solver::enstrophy() const {
  double acc = 0.0;
  for (const auto& v : zeta_hat_) acc += std::norm(v);
  const double n = static_cast<double>(zeta_hat_.size());
  return 0.5 * acc / (n * n);
}

Tensor random_vorticity(std::size_t height, std::size_t width, double k_peak, double rms,
                        std::mt19937_64& rng) {
  fft::require_pow2(height, "grid height");
  fft::require_pow2(width, "grid width");
  std::vector<double> noise(height * width);
  for (auto& v : noise) v = standard_normal(rng);
  auto spec = to_spectral(noise, height, width);
  const double ky_unit = static_cast<double>(width) / static_cast<double>(height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double kx = static_cast<double>(signed_index(c, width));
      const double ky = static_cast<double>(signed_index(r, height)) * ky_unit;
      const double k = std::sqrt(kx * kx + ky * ky);
      const bool nyquist = 2 * c == width || 2 * r == height;
      const double shape = nyquist ? 0.0 : k * std::exp(-(k / k_peak) * (k / k_peak));
      spec[r * width + c] *= shape;
    }
  }
  auto field = to_physical(std::move(spec), height, width);
  double ss = 0.0;
  for (double v : field) ss += v * v;
  const double cur = std::sqrt(ss / static_cast<double>(field.size()));
  if (cur > 0.0)
    for (double& v : field) v *= rms / cur;
  return Tensor::from({height, width}, std::move(field));
}

}  // namespace oceannet::qg
