#include "oceannet/fft.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "oceannet/errors.hpp"

namespace oceannet::fft {

namespace {

struct Plan {
  std::vector<std::size_t> bitrev;
  std::vector<cplx> twiddle;  // exp(-2*pi*i*k/N), k < N/2
};

const Plan& plan_for(std::size_t n) {
  thread_local std::map<std::size_t, Plan> cache;
  thread_local const Plan* last = nullptr;
  thread_local std::size_t last_n = 0;
  if (last && last_n == n) return *last;
  auto it = cache.find(n);
  if (it != cache.end()) {
    last = &it->second;
    last_n = n;
    return *last;
  }

  Plan plan;
  plan.bitrev.resize(n);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    plan.bitrev[i] = r;
  }
  plan.twiddle.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    plan.twiddle[k] = {std::cos(a), std::sin(a)};
  }
  last = &cache.emplace(n, std::move(plan)).first->second;
  last_n = n;
  return *last;
}

}  // namespace

void require_pow2(std::size_t n, const char* what) {
  if (!is_pow2(n)) {
    throw ConfigError(std::string(what) + " must be a power of two, got " + std::to_string(n));
  }
}

void transform(std::span<cplx> data, bool inverse) {
  const std::size_t n = data.size();
  require_pow2(n, "FFT length");
  if (n == 1) return;
  const Plan& plan = plan_for(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = plan.bitrev[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  // Interleaved doubles, with the complex products written out by hand.
  double* d = reinterpret_cast<double*>(data.data());
  const double* tw = reinterpret_cast<const double*>(plan.twiddle.data());
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = tw[2 * k * stride], wi = sign * tw[2 * k * stride + 1];
        double* a = d + 2 * (start + k);
        double* b = d + 2 * (start + k + half);
        const double vr = b[0] * wr - b[1] * wi;
        const double vi = b[0] * wi + b[1] * wr;
        b[0] = a[0] - vr;
        b[1] = a[1] - vi;
        a[0] += vr;
        a[1] += vi;
      }
    }
  }
}

void transform2d(std::span<cplx> plane, std::size_t rows, std::size_t cols, bool inverse) {
  if (plane.size() != rows * cols) throw DimensionError("transform2d: plane size mismatch");
  require_pow2(rows, "FFT rows");
  require_pow2(cols, "FFT cols");
  for (std::size_t r = 0; r < rows; ++r) transform(plane.subspan(r * cols, cols), inverse);
  std::vector<cplx> column(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = plane[r * cols + c];
    transform(column, inverse);
    for (std::size_t r = 0; r < rows; ++r) plane[r * cols + c] = column[r];
  }
}

}  // namespace oceannet::fft
