#include "oceannet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "oceannet/errors.hpp"

namespace oceannet {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, DType dtype)
    : shape_(std::move(shape)), numel_(shape_numel(shape_)), dtype_(dtype) {
  data_.assign(dtype_ == DType::Complex128 ? 2 * numel_ : numel_, 0.0);
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("Tensor::from: " + std::to_string(values.size()) +
                         " values for shape " + shape_str(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.numel_ = values.size();
  t.data_.assign(values.begin(), values.end());
  return t;
}

Tensor Tensor::from_complex(Shape shape, const std::vector<cplx>& values) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("Tensor::from_complex: " + std::to_string(values.size()) +
                         " values for shape " + shape_str(shape));
  }
  Tensor t(std::move(shape), DType::Complex128);
  std::copy(values.begin(), values.end(), t.cdata().begin());
  return t;
}

std::span<double> Tensor::real() {
  require_real(*this, "Tensor::real");
  return data_;
}

std::span<const double> Tensor::real() const {
  require_real(*this, "Tensor::real");
  return data_;
}

std::span<cplx> Tensor::cdata() {
  require_complex(*this, "Tensor::cdata");
  return {reinterpret_cast<cplx*>(data_.data()), numel_};
}

std::span<const cplx> Tensor::cdata() const {
  require_complex(*this, "Tensor::cdata");
  return {reinterpret_cast<const cplx*>(data_.data()), numel_};
}

double Tensor::item() const {
  if (numel_ != 1 || is_complex()) {
    throw UsageError("Tensor::item on non-scalar tensor of shape " + shape_str(shape_));
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel_) {
    throw DimensionError("reshape " + shape_str(shape_) + " -> " + shape_str(shape));
  }
  Tensor t = *this;
  t.shape_ = std::move(shape);
  return t;
}

bool Tensor::all_finite() const { return oceannet::all_finite(data_); }

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::identical(const Tensor& other) const {
  return shape_ == other.shape_ && dtype_ == other.dtype_ &&
         data_.size() == other.data_.size() &&
         (data_.empty() ||
          std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0);
}

bool all_finite(std::span<const double> values) {
  // x * 0 is NaN exactly when x is NaN or Inf; split accumulators vectorize.
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  const std::size_t n = values.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 8; ++k) acc[k] += values[i + k] * 0.0;
  }
  for (; i < n; ++i) acc[0] += values[i] * 0.0;
  double total = 0.0;
  for (double a : acc) total += a;
  return total == 0.0;
}

void require_real(const Tensor& t, const char* op) {
  if (t.is_complex()) throw TypeError(std::string(op) + ": expected real tensor");
}

void require_complex(const Tensor& t, const char* op) {
  if (!t.is_complex()) throw TypeError(std::string(op) + ": expected complex tensor");
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(t.shape()));
  }
}

}  // namespace oceannet
