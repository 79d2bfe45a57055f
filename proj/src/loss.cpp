#include "oceannet/loss.hpp"

#include <cmath>
#include <string>

#include "oceannet/errors.hpp"
#include "oceannet/fft.hpp"
#include "oceannet/ops.hpp"
#include "oceannet/spectral.hpp"

namespace oceannet {

namespace {

// Latitude mean of the row DFTs, k_x = 0..W/2.
std::vector<cplx> zonal_mean_transform(std::span<const double> f, std::size_t h, std::size_t w) {
  const std::size_t half = w / 2 + 1;
  std::vector<cplx> mean(half), row(w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) row[c] = {f[r * w + c], 0.0};
    fft::transform(row, false);
    for (std::size_t k = 0; k < half; ++k) mean[k] += row[k];
  }
  for (auto& v : mean) v /= static_cast<double>(h);
  return mean;
}

// sum_{k >= k_T} |T_pred(k) - T_target(k)|^2 with T the zonal mean transform.
ad::Var complex_band_penalty(const ad::Var& pred, const ad::Var& target, std::size_t cutoff_k) {
  const std::size_t h = pred.shape()[0], w = pred.shape()[1];
  const auto tp = zonal_mean_transform(pred.value().real(), h, w);
  const auto tt = zonal_mean_transform(target.value().real(), h, w);
  std::vector<cplx> diff(tp.size());
  double mu = 0.0;
  for (std::size_t k = cutoff_k; k < tp.size(); ++k) {
    diff[k] = tp[k] - tt[k];
    mu += std::norm(diff[k]);
  }
  return ad::make_result(
      Tensor::scalar(mu), {pred, target},
      [diff, h, w](const Tensor& g, std::span<ad::Node* const> p) {
        // dmu/dT(k) = 2 diff(k); T(k) = (1/H) sum_rows DFT_row(f)[k].
        std::vector<cplx> buf(w);
        for (std::size_t k = 0; k < diff.size(); ++k) buf[k] = 2.0 * g.raw()[0] * diff[k] / static_cast<double>(h);
        fft::transform(buf, true);
        for (int side = 0; side < 2; ++side) {
          if (!p[side]->requires_grad) continue;
          const double sign = side == 0 ? 1.0 : -1.0;
          auto dst = p[side]->grad_buffer().real();
          for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) dst[r * w + c] += sign * buf[c].real();
        }
      },
      "spectral_penalty");
}

}  // namespace

void LossConfig::validate(std::size_t width) const {
  if (cutoff_k > width / 2) {
    throw ConfigError("LossConfig: cutoff_k " + std::to_string(cutoff_k) + " exceeds W/2 = " +
                      std::to_string(width / 2));
  }
  if (!std::isfinite(reg_weight) || reg_weight < 0.0) {
    throw ConfigError("LossConfig: reg_weight must be finite and >= 0");
  }
}

ad::Var masked_mse(const ad::Var& pred, const ad::Var& target, const Mask& mask) {
  const Tensor& pv = pred.value();
  const Tensor& tv = target.value();
  if (pv.shape() != tv.shape() || pv.numel() != mask.size()) {
    throw DimensionError("masked_mse: pred " + shape_str(pv.shape()) + ", target " +
                         shape_str(tv.shape()) + ", mask " + std::to_string(mask.height()) +
                         "x" + std::to_string(mask.width()));
  }
  if (mask.ocean_count() == 0) throw ConfigError("masked_mse: mask has no ocean pixels");
  const double inv = 1.0 / static_cast<double>(mask.ocean_count());
  auto p = pv.real();
  auto t = tv.real();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask.ocean(i)) {
      const double d = p[i] - t[i];
      acc += d * d;
    }
  }
  return ad::make_result(
      Tensor::scalar(acc * inv), {pred, target},
      [mask, inv](const Tensor& g, std::span<ad::Node* const> parents) {
        const double gs = 2.0 * inv * g.raw()[0];
        auto p = parents[0]->value.real();
        auto t = parents[1]->value.real();
        for (int side = 0; side < 2; ++side) {
          if (!parents[side]->requires_grad) continue;
          const double sign = side == 0 ? gs : -gs;
          auto dst = parents[side]->grad_buffer().real();
          for (std::size_t i = 0; i < dst.size(); ++i) {
            if (mask.ocean(i)) dst[i] += sign * (p[i] - t[i]);
          }
        }
      },
      "masked_mse");
}

double masked_mse(const FieldState& pred, const FieldState& target) {
  require_compatible(pred, target, "masked_mse");
  ad::NoGradGuard guard;
  return masked_mse(ad::Var(pred.values), ad::Var(target.values), pred.mask).value().item();
}

ad::Var spectral_penalty(const ad::Var& pred, const ad::Var& target, std::size_t cutoff_k,
                         PenaltyMode mode) {
  if (pred.shape() != target.shape() || pred.shape().size() != 2) {
    throw DimensionError("spectral_penalty: fields " + shape_str(pred.shape()) + " and " +
                         shape_str(target.shape()));
  }
  const std::size_t half = pred.shape()[1] / 2 + 1;
  if (cutoff_k >= half) return ad::Var(Tensor::scalar(0.0));
  if (mode == PenaltyMode::ComplexDifference) return complex_band_penalty(pred, target, cutoff_k);
  const ad::Var diff = ad::sub(ad::zonal_spectrum(pred), ad::zonal_spectrum(target));
  return ad::sum_squares(ad::slice(diff, cutoff_k, half - cutoff_k));
}

LossTerms total_loss(const Tendency& n, const ad::Var& x, const Tensor& y1, const Tensor& y2,
                     const Mask& mask, const LossConfig& cfg) {
  const ad::Var t1(y1), t2(y2);
  const ad::Var z1 = advance(n, x, mask);
  const ad::Var z2 = advance(n, z1, mask);
  const ad::Var mse1 = masked_mse(z1, t1, mask);
  const ad::Var mse2 = masked_mse(z2, t2, mask);
  const ad::Var mu1 = spectral_penalty(z1, t1, cfg.cutoff_k, cfg.penalty);
  const ad::Var mu2 = spectral_penalty(z2, t2, cfg.cutoff_k, cfg.penalty);

  LossTerms terms;
  terms.mse1 = mse1.value().item();
  terms.mse2 = mse2.value().item();
  terms.mu1 = mu1.value().item();
  terms.mu2 = mu2.value().item();
  ad::Var total = ad::add(mse1, mse2);
  if (cfg.reg_weight != 0.0) {
    total = ad::add(total, ad::scale(ad::add(mu1, mu2), cfg.reg_weight));
  }
  terms.total = total;
  return terms;
}

}  // namespace oceannet
