#include "oceannet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oceannet/errors.hpp"
#include "oceannet/loss.hpp"
#include "oceannet/random.hpp"

namespace oceannet {

namespace {

// Mean over a of the squared-distance minimum over b, then the root per point.
double directed_mean(const ContourSet& a, const ContourSet& b) {
  double total = 0.0;
  for (const auto& p : a.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b.points) {
      const double dr = p.row - q.row, dc = p.col - q.col;
      best = std::min(best, dr * dr + dc * dc);
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(a.points.size());
}

double directed_max(const ContourSet& a, const ContourSet& b) {
  double worst = 0.0;
  for (const auto& p : a.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b.points) {
      const double dr = p.row - q.row, dc = p.col - q.col;
      best = std::min(best, dr * dr + dc * dc);
    }
    worst = std::max(worst, std::sqrt(best));
  }
  return worst;
}

void require_points(const ContourSet& a, const ContourSet& b) {
  if (a.points.empty() || b.points.empty()) {
    throw UndefinedMetricError("contour distance undefined for an empty contour set");
  }
}

}  // namespace

double rmse(const FieldState& pred, const FieldState& target) {
  return std::sqrt(masked_mse(pred, target));
}

double pearson_cc(const FieldState& pred, const FieldState& target) {
  require_compatible(pred, target, "pearson_cc");
  const auto& mask = pred.mask;
  if (mask.ocean_count() < 2) throw UndefinedMetricError("pearson_cc: fewer than two ocean pixels");
  auto p = pred.values.real();
  auto t = target.values.real();
  double mp = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask.ocean(i)) {
      mp += p[i];
      mt += t[i];
    }
  }
  const double n = static_cast<double>(mask.ocean_count());
  mp /= n;
  mt /= n;
  double cov = 0.0, vp = 0.0, vt = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!mask.ocean(i)) continue;
    const double dp = p[i] - mp, dt = t[i] - mt;
    cov += dp * dt;
    vp += dp * dp;
    vt += dt * dt;
  }
  if (vp <= 0.0 || vt <= 0.0) throw UndefinedMetricError("pearson_cc: zero variance");
  return std::clamp(cov / std::sqrt(vp * vt), -1.0, 1.0);
}

ContourSet extract_contour(const FieldState& f, double level) {
  ContourSet out;
  out.level = level;
  const std::size_t h = f.height(), w = f.width();
  const auto& m = f.mask;
  auto cross = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
    if (!m.ocean(i0, j0) || !m.ocean(i1, j1)) return;
    const double a = f.values.at(i0, j0), b = f.values.at(i1, j1);
    if ((a < level) == (b < level)) return;
    const double t = (level - a) / (b - a);
    out.points.push_back({static_cast<double>(i0) + t * static_cast<double>(i1 - i0),
                          static_cast<double>(j0) + t * static_cast<double>(j1 - j0)});
  };
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      if (j + 1 < w) cross(i, j, i, j + 1);
      if (i + 1 < h) cross(i, j, i + 1, j);
    }
  }
  return out;
}

double mhd(const ContourSet& a, const ContourSet& b, double km_per_cell) {
  require_points(a, b);
  return std::max(directed_mean(a, b), directed_mean(b, a)) * km_per_cell;
}

double hausdorff(const ContourSet& a, const ContourSet& b, double km_per_cell) {
  require_points(a, b);
  return std::max(directed_max(a, b), directed_max(b, a)) * km_per_cell;
}

double saturation(Metric metric, std::span<const FieldState> frames, const SaturationOptions& opts) {
  const std::size_t n = frames.size();
  if (n < 2) throw ConfigError("saturation: need at least two frames");
  std::mt19937_64 rng(opts.seed);
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < opts.n_pairs; ++k) {
    const std::size_t i = uniform_index(rng, n);
    std::size_t j = uniform_index(rng, n - 1);
    if (j >= i) ++j;
    try {
      switch (metric) {
        case Metric::Rmse:
          total += rmse(frames[i], frames[j]);
          break;
        case Metric::Cc:
          total += pearson_cc(frames[i], frames[j]);
          break;
        case Metric::Mhd:
          total += mhd(extract_contour(frames[i], opts.level), extract_contour(frames[j], opts.level),
                       opts.km_per_cell);
          break;
      }
      ++used;
    } catch (const UndefinedMetricError&) {
    }
  }
  if (used == 0) throw UndefinedMetricError("saturation: metric undefined for every sampled pair");
  return opts.factor * total / static_cast<double>(used);
}

RolloutTrace persistence(const FieldState& x0, std::size_t n, double lead_interval_days) {
  return {std::vector<FieldState>(n, x0), lead_interval_days};
}

double ocean_quantile(std::span<const FieldState> frames, double q) {
  std::vector<double> values;
  for (const auto& f : frames) {
    auto v = f.values.real();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (f.mask.ocean(i)) values.push_back(v[i]);
  }
  if (values.empty()) throw ConfigError("ocean_quantile: no ocean values");
  const auto rank = static_cast<std::size_t>(
      std::clamp(std::ceil(q * static_cast<double>(values.size())) - 1.0, 0.0,
                 static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
  return values[rank];
}

}  // namespace oceannet
