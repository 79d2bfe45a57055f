#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "oceannet/tensor.hpp"

namespace oceannet {

/// Value written to land pixels, in both physical and standardized units.
inline constexpr double kLandFill = 0.0;

/// Immutable ocean/land mask (1 = ocean). Copies share storage.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t height, std::size_t width, std::vector<std::uint8_t> ocean);
  static Mask all_ocean(std::size_t height, std::size_t width);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return height_ * width_; }
  bool ocean(std::size_t i, std::size_t j) const { return (*ocean_)[i * width_ + j] != 0; }
  bool ocean(std::size_t flat) const { return (*ocean_)[flat] != 0; }
  std::size_t ocean_count() const { return ocean_count_; }
  double ocean_fraction() const;
  const std::vector<std::uint8_t>& bytes() const { return *ocean_; }

  /// 0/1 real tensor of shape [H,W].
  const Tensor& as_tensor() const { return *tensor_; }

  bool operator==(const Mask& other) const;

 private:
  std::size_t height_ = 0, width_ = 0, ocean_count_ = 0;
  std::shared_ptr<const std::vector<std::uint8_t>> ocean_;
  std::shared_ptr<const Tensor> tensor_;
};

/// One gridded scalar field with its mask. `values` has shape [H,W].
struct FieldState {
  Tensor values;
  Mask mask;

  std::size_t height() const { return values.dim(0); }
  std::size_t width() const { return values.dim(1); }

  /// Copy with land pixels set to kLandFill.
  FieldState masked() const;
};

/// Throws DimensionError unless both fields share grid and mask.
void require_compatible(const FieldState& a, const FieldState& b, const char* op);

}  // namespace oceannet
