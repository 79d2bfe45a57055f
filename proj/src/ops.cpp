#include "oceannet/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "gelu_kernel.hpp"
#include "oceannet/errors.hpp"
#include "oceannet/fft.hpp"

namespace oceannet::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape() || a.value().dtype() != b.value().dtype()) {
    throw DimensionError(std::string(op) + ": operands " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
}

void axpy(std::span<double> dst, std::span<const double> src, double s) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
}

// Split a shape into (batch, H, W) treating the last two axes as the plane.
struct Planes {
  std::size_t batch, rows, cols;
};

Planes planes_of(const Shape& s, const char* op) {
  if (s.size() < 2) throw DimensionError(std::string(op) + ": need at least rank 2");
  std::size_t batch = 1;
  for (std::size_t i = 0; i + 2 < s.size(); ++i) batch *= s[i];
  return {batch, s[s.size() - 2], s[s.size() - 1]};
}

void fft_planes(std::span<cplx> data, const Planes& p, bool inverse) {
  const std::size_t n = p.rows * p.cols;
  for (std::size_t b = 0; b < p.batch; ++b) {
    fft::transform2d(data.subspan(b * n, n), p.rows, p.cols, inverse);
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  axpy(out.raw(), b.value().raw(), 1.0);
  return make_result(
      std::move(out), {a, b},
      [](const Tensor& g, std::span<Node* const> p) {
        for (Node* n : p)
          if (n->requires_grad) axpy(n->grad_buffer().raw(), g.raw(), 1.0);
      },
      "add");
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  axpy(out.raw(), b.value().raw(), -1.0);
  return make_result(
      std::move(out), {a, b},
      [](const Tensor& g, std::span<Node* const> p) {
        if (p[0]->requires_grad) axpy(p[0]->grad_buffer().raw(), g.raw(), 1.0);
        if (p[1]->requires_grad) axpy(p[1]->grad_buffer().raw(), g.raw(), -1.0);
      },
      "sub");
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.raw()) v *= s;
  return make_result(
      std::move(out), {a},
      [s](const Tensor& g, std::span<Node* const> p) {
        if (p[0]->requires_grad) axpy(p[0]->grad_buffer().raw(), g.raw(), s);
      },
      "scale");
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  require_real(a.value(), "mul");
  Tensor out = a.value();
  auto o = out.real();
  auto bv = b.value().real();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return make_result(
      std::move(out), {a, b},
      [](const Tensor& g, std::span<Node* const> p) {
        auto gv = g.real();
        for (int k = 0; k < 2; ++k) {
          if (!p[k]->requires_grad) continue;
          auto other = p[1 - k]->value.real();
          auto dst = p[k]->grad_buffer().real();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gv[i] * other[i];
        }
      },
      "mul");
}

Var cmul(const Var& a, const Var& b) {
  require_same(a, b, "cmul");
  require_complex(a.value(), "cmul");
  Tensor out = a.value();
  auto o = out.cdata();
  auto bv = b.value().cdata();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return make_result(
      std::move(out), {a, b},
      [](const Tensor& g, std::span<Node* const> p) {
        auto gv = g.cdata();
        for (int k = 0; k < 2; ++k) {
          if (!p[k]->requires_grad) continue;
          auto other = p[1 - k]->value.cdata();
          auto dst = p[k]->grad_buffer().cdata();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += std::conj(other[i]) * gv[i];
        }
      },
      "cmul");
}

Var sum(const Var& a) {
  require_real(a.value(), "sum");
  double s = 0.0;
  for (double v : a.value().real()) s += v;
  return make_result(
      Tensor::scalar(s), {a},
      [](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        const double gs = g.raw()[0];
        for (double& v : p[0]->grad_buffer().real()) v += gs;
      },
      "sum");
}

Var sum_squares(const Var& a) {
  require_real(a.value(), "sum_squares");
  double s = 0.0;
  for (double v : a.value().real()) s += v * v;
  return make_result(
      Tensor::scalar(s), {a},
      [](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        axpy(p[0]->grad_buffer().raw(), p[0]->value.raw(), 2.0 * g.raw()[0]);
      },
      "sum_squares");
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return make_result(
      std::move(out), {a},
      [](const Tensor& g, std::span<Node* const> p) {
        if (p[0]->requires_grad) axpy(p[0]->grad_buffer().raw(), g.raw(), 1.0);
      },
      "reshape");
}

Var slice(const Var& a, std::size_t start, std::size_t count) {
  require_real(a.value(), "slice");
  require_rank(a.value(), 1, "slice");
  if (start + count > a.value().numel()) {
    throw DimensionError("slice: range exceeds length " + std::to_string(a.value().numel()));
  }
  auto src = a.value().real();
  std::vector<double> vals(src.begin() + start, src.begin() + start + count);
  return make_result(
      Tensor::from({count}, std::move(vals)), {a},
      [start](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        auto dst = p[0]->grad_buffer().real();
        auto gv = g.real();
        for (std::size_t i = 0; i < gv.size(); ++i) dst[start + i] += gv[i];
      },
      "slice");
}

Var concat_channels(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_channels: no inputs");
  const auto& first = parts[0].value();
  require_rank(first, 3, "concat_channels");
  std::size_t channels = 0;
  for (const auto& v : parts) {
    require_rank(v.value(), 3, "concat_channels");
    if (v.value().dtype() != first.dtype() || v.shape()[1] != first.dim(1) ||
        v.shape()[2] != first.dim(2)) {
      throw DimensionError("concat_channels: incompatible part " + shape_str(v.shape()));
    }
    channels += v.shape()[0];
  }
  Tensor out({channels, first.dim(1), first.dim(2)}, first.dtype());
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& v : parts) {
    offsets.push_back(off);
    auto src = v.value().raw();
    std::copy(src.begin(), src.end(), out.raw().begin() + static_cast<std::ptrdiff_t>(off));
    off += src.size();
  }
  return make_result(
      std::move(out), std::vector<Var>(parts.begin(), parts.end()),
      [offsets](const Tensor& g, std::span<Node* const> p) {
        for (std::size_t k = 0; k < p.size(); ++k) {
          if (!p[k]->requires_grad) continue;
          auto dst = p[k]->grad_buffer().raw();
          axpy(dst, g.raw().subspan(offsets[k], dst.size()), 1.0);
        }
      },
      "concat_channels");
}

Var channel_mix(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  require_real(xv, "channel_mix");
  require_real(wv, "channel_mix");
  require_real(bv, "channel_mix");
  require_rank(xv, 3, "channel_mix");
  require_rank(wv, 2, "channel_mix");
  const std::size_t cin = xv.dim(0), cout = wv.dim(0);
  const std::size_t pixels = xv.dim(1) * xv.dim(2);
  if (wv.dim(1) != cin || bv.numel() != cout) {
    throw DimensionError("channel_mix: x " + shape_str(xv.shape()) + ", w " +
                         shape_str(wv.shape()) + ", b " + shape_str(bv.shape()));
  }
  const auto ci = static_cast<Eigen::Index>(cin);
  const auto co = static_cast<Eigen::Index>(cout);
  const auto px = static_cast<Eigen::Index>(pixels);

  Tensor out({cout, xv.dim(1), xv.dim(2)});
  MapMat om(out.raw().data(), co, px);
  om.noalias() = CMapMat(wv.raw().data(), co, ci) * CMapMat(xv.raw().data(), ci, px);
  for (std::size_t c = 0; c < cout; ++c) om.row(static_cast<Eigen::Index>(c)).array() += bv.raw()[c];

  return make_result(
      std::move(out), {x, w, b},
      [ci, co, px](const Tensor& g, std::span<Node* const> p) {
        CMapMat gm(g.raw().data(), co, px);
        if (p[0]->requires_grad) {
          MapMat gx(p[0]->grad_buffer().raw().data(), ci, px);
          gx.noalias() += CMapMat(p[1]->value.raw().data(), co, ci).transpose() * gm;
        }
        if (p[1]->requires_grad) {
          MapMat gw(p[1]->grad_buffer().raw().data(), co, ci);
          gw.noalias() += gm * CMapMat(p[0]->value.raw().data(), ci, px).transpose();
        }
        if (p[2]->requires_grad) {
          auto gb = p[2]->grad_buffer().raw();
          const double* gp = g.raw().data();
          for (Eigen::Index c = 0; c < co; ++c) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < px; ++k) acc += gp[c * px + k];
            gb[static_cast<std::size_t>(c)] += acc;
          }
        }
      },
      "channel_mix");
}

Var gelu(const Var& x) {
  require_real(x.value(), "gelu");
  Tensor out(x.shape());
  Tensor slope(x.shape());
  detail::gelu_kernel(x.value().real().data(), out.real().data(), slope.real().data(), out.numel());
  return make_result(
      std::move(out), {x},
      [slope = std::move(slope)](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        auto dst = p[0]->grad_buffer().real();
        auto gv = g.real();
        auto sv = slope.real();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gv[i] * sv[i];
      },
      "gelu");
}

Var apply_mask(const Var& x, const Tensor& mask, double fill) {
  require_real(x.value(), "apply_mask");
  const auto plane = mask.numel();
  if (x.value().numel() % plane != 0 || x.shape().size() < 2 ||
      x.shape()[x.shape().size() - 2] * x.shape().back() != plane) {
    throw DimensionError("apply_mask: field " + shape_str(x.shape()) + " vs mask " +
                         shape_str(mask.shape()));
  }
  Tensor out = x.value();
  auto o = out.real();
  auto m = mask.real();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (m[i % plane] == 0.0) o[i] = fill;
  }
  return make_result(
      std::move(out), {x},
      [mask, plane](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        auto dst = p[0]->grad_buffer().real();
        auto gv = g.real();
        auto m = mask.real();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gv[i] * m[i % plane];
      },
      "apply_mask");
}

Var to_complex(const Var& x) {
  require_real(x.value(), "to_complex");
  Tensor out(x.shape(), DType::Complex128);
  auto o = out.cdata();
  auto src = x.value().real();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = {src[i], 0.0};
  return make_result(
      std::move(out), {x},
      [](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        auto dst = p[0]->grad_buffer().real();
        auto gv = g.cdata();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gv[i].real();
      },
      "to_complex");
}

Var real_part(const Var& z) {
  require_complex(z.value(), "real_part");
  Tensor out(z.shape());
  auto o = out.real();
  auto src = z.value().cdata();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = src[i].real();
  return make_result(
      std::move(out), {z},
      [](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        auto dst = p[0]->grad_buffer().cdata();
        auto gv = g.real();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gv[i];
      },
      "real_part");
}

Var fft2(const Var& z) {
  require_complex(z.value(), "fft2");
  const Planes pl = planes_of(z.shape(), "fft2");
  fft::require_pow2(pl.rows, "fft2 height");
  fft::require_pow2(pl.cols, "fft2 width");
  Tensor out = z.value();
  fft_planes(out.cdata(), pl, false);
  return make_result(
      std::move(out), {z},
      [pl](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        // Adjoint of the unnormalized DFT is the unnormalized inverse DFT.
        Tensor tmp = g;
        fft_planes(tmp.cdata(), pl, true);
        axpy(p[0]->grad_buffer().raw(), tmp.raw(), 1.0);
      },
      "fft2");
}

Var ifft2(const Var& z) {
  require_complex(z.value(), "ifft2");
  const Planes pl = planes_of(z.shape(), "ifft2");
  fft::require_pow2(pl.rows, "ifft2 height");
  fft::require_pow2(pl.cols, "ifft2 width");
  const double norm = 1.0 / static_cast<double>(pl.rows * pl.cols);
  Tensor out = z.value();
  fft_planes(out.cdata(), pl, true);
  for (double& v : out.raw()) v *= norm;
  return make_result(
      std::move(out), {z},
      [pl, norm](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        Tensor tmp = g;
        fft_planes(tmp.cdata(), pl, false);
        axpy(p[0]->grad_buffer().raw(), tmp.raw(), norm);
      },
      "ifft2");
}

}  // namespace oceannet::ad
