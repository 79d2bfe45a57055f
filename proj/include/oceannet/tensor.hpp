#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace oceannet {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;

/// Allocator returning 64-byte aligned blocks, so vector kernels see the same
/// alignment for every tensor regardless of which thread allocated it.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

enum class DType : std::uint8_t { Real64, Complex128 };

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major tensor of doubles or complex doubles.
///
/// Complex data is stored interleaved (re, im), so `raw()` always exposes the
/// underlying doubles; optimizers and checkpoints operate on that view.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, DType dtype = DType::Real64);

  static Tensor zeros(Shape shape, DType dtype = DType::Real64) {
    return Tensor(std::move(shape), dtype);
  }
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor from_complex(Shape shape, const std::vector<cplx>& values);
  static Tensor scalar(double value) { return from({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t numel() const { return numel_; }
  DType dtype() const { return dtype_; }
  bool is_complex() const { return dtype_ == DType::Complex128; }
  bool empty() const { return numel_ == 0; }

  // Element views. real() requires Real64, cdata() requires Complex128.
  std::span<double> real();
  std::span<const double> real() const;
  std::span<cplx> cdata();
  std::span<const cplx> cdata() const;

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  double item() const;

  // Real accessors for rank-2 / rank-3 tensors.
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const;
  void fill(double value);

  /// Bitwise equality of shape, dtype and data.
  bool identical(const Tensor& other) const;

 private:
  Shape shape_;
  std::size_t numel_ = 0;
  DType dtype_ = DType::Real64;
  std::vector<double, AlignedAllocator<double>> data_;
};

/// True when every value in `values` is finite.
bool all_finite(std::span<const double> values);

void require_real(const Tensor& t, const char* op);
void require_complex(const Tensor& t, const char* op);
void require_rank(const Tensor& t, std::size_t rank, const char* op);

}  // namespace oceannet
