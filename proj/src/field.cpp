#include "oceannet/field.hpp"

#include <algorithm>
#include <string>

#include "oceannet/errors.hpp"

namespace oceannet {

Mask::Mask(std::size_t height, std::size_t width, std::vector<std::uint8_t> ocean)
    : height_(height), width_(width) {
  if (ocean.size() != height * width) {
    throw DimensionError("Mask: " + std::to_string(ocean.size()) + " entries for " +
                         std::to_string(height) + "x" + std::to_string(width) + " grid");
  }
  Tensor t({height, width});
  auto tv = t.real();
  for (std::size_t i = 0; i < ocean.size(); ++i) {
    ocean[i] = ocean[i] ? 1 : 0;
    tv[i] = ocean[i];
    ocean_count_ += ocean[i];
  }
  ocean_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(ocean));
  tensor_ = std::make_shared<const Tensor>(std::move(t));
}

Mask Mask::all_ocean(std::size_t height, std::size_t width) {
  return Mask(height, width, std::vector<std::uint8_t>(height * width, 1));
}

double Mask::ocean_fraction() const {
  return size() ? static_cast<double>(ocean_count_) / static_cast<double>(size()) : 0.0;
}

bool Mask::operator==(const Mask& other) const {
  if (height_ != other.height_ || width_ != other.width_) return false;
  if (ocean_ == other.ocean_) return true;
  if (!ocean_ || !other.ocean_) return false;
  return *ocean_ == *other.ocean_;
}

FieldState FieldState::masked() const {
  FieldState out = *this;
  auto v = out.values.real();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask.ocean(i)) v[i] = kLandFill;
  }
  return out;
}

void require_compatible(const FieldState& a, const FieldState& b, const char* op) {
  if (a.values.shape() != b.values.shape() || !(a.mask == b.mask)) {
    throw DimensionError(std::string(op) + ": fields differ in grid or mask (" +
                         shape_str(a.values.shape()) + " vs " + shape_str(b.values.shape()) + ")");
  }
}

}  // namespace oceannet
