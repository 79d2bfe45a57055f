#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oceannet/field.hpp"
#include "oceannet/pec.hpp"

namespace oceannet {

/// Root mean squared difference over ocean pixels.
double rmse(const FieldState& pred, const FieldState& target);

/// Pearson correlation over ocean pixels. Throws UndefinedMetricError when
/// fewer than two ocean pixels exist or either field has zero variance.
double pearson_cc(const FieldState& pred, const FieldState& target);

struct ContourPoint {
  double row = 0.0;  // latitude index
  double col = 0.0;  // longitude index
};

/// Level-crossing points of one SSH level line.
struct ContourSet {
  std::vector<ContourPoint> points;
  double level = 0.0;
};

/// Marching-squares vertices: one linearly interpolated point on every grid
/// edge whose two ocean endpoints straddle `level`. Empty when the level does
/// not cross the ocean field.
ContourSet extract_contour(const FieldState& f, double level);

/// Modified Hausdorff distance: max of the two directed mean nearest-neighbour
/// distances, scaled by km_per_cell. Throws UndefinedMetricError on an empty set.
double mhd(const ContourSet& a, const ContourSet& b, double km_per_cell = 1.0);

/// Classical (max-min) Hausdorff distance.
double hausdorff(const ContourSet& a, const ContourSet& b, double km_per_cell = 1.0);

enum class Metric { Rmse, Cc, Mhd };

struct SaturationOptions {
  std::size_t n_pairs = 1000;
  double factor = 0.95;
  std::uint64_t seed = 0;
  double level = 0.0;  // contour level for Mhd
  double km_per_cell = 1.0;
};

/// factor * mean of `metric` over n_pairs uniformly drawn distinct-time pairs.
/// Pairs whose metric is undefined are skipped.
double saturation(Metric metric, std::span<const FieldState> frames,
                  const SaturationOptions& opts = {});

/// n copies of x0.
RolloutTrace persistence(const FieldState& x0, std::size_t n, double lead_interval_days = 0.0);

/// Value at quantile q in [0,1] of the ocean pixels across frames (nearest rank).
double ocean_quantile(std::span<const FieldState> frames, double q);

}  // namespace oceannet
