#include "oceannet/spectral.hpp"

#include <Eigen/Core>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <tuple>

#include "oceannet/errors.hpp"
#include "oceannet/fft.hpp"

namespace oceannet {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::Index;

double phase(std::size_t k, std::size_t n, std::size_t len) {
  return 2.0 * std::numbers::pi * static_cast<double>((k * n) % len) / static_cast<double>(len);
}

// Row DFTs of a real [H,W] field, nonnegative half (W/2+1 columns).
std::vector<cplx> row_half_spectra(std::span<const double> f, std::size_t h, std::size_t w) {
  const std::size_t half = w / 2 + 1;
  std::vector<cplx> out(h * half);
  std::vector<cplx> row(w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) row[c] = {f[r * w + c], 0.0};
    fft::transform(row, false);
    std::copy(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(half), out.begin() + static_cast<std::ptrdiff_t>(r * half));
  }
  return out;
}

struct ConvPlan {
  std::size_t height = 0, width = 0, ncols = 0, nrows = 0;
  RowMat cos_fwd, sin_fwd;          // [W x Kx]
  RowMat fwd_re, fwd_im;            // [n_rows x H], exp(-i...)
  RowMat fwd_adj_re, fwd_adj_im;    // conjugate transpose
  RowMat inv_re, inv_im;            // [H x n_rows], exp(+i...)
  RowMat inv_adj_re, inv_adj_im;    // conjugate transpose
  RowMat cos_inv, sin_inv;          // [Kx x W], Hermitian weights and 1/(HW)
};

std::shared_ptr<const ConvPlan> conv_plan(std::size_t h, std::size_t w, const ModeWindow& win) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  thread_local std::map<Key, std::shared_ptr<const ConvPlan>> cache;
  const Key key{h, w, win.kmax_x, win.kmax_y};
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto plan = std::make_shared<ConvPlan>();
  plan->height = h;
  plan->width = w;
  const auto rows = retained_rows(h, win.kmax_y);
  const std::size_t kx = retained_cols(w, win.kmax_x);
  plan->ncols = kx;
  plan->nrows = rows.size();
  const auto H = static_cast<Index>(h), W = static_cast<Index>(w);
  const auto K = static_cast<Index>(kx), R = static_cast<Index>(rows.size());

  plan->cos_fwd.resize(W, K);
  plan->sin_fwd.resize(W, K);
  plan->cos_inv.resize(K, W);
  plan->sin_inv.resize(K, W);
  const double norm = 1.0 / static_cast<double>(h * w);
  for (std::size_t n = 0; n < w; ++n) {
    for (std::size_t k = 0; k < kx; ++k) {
      const double a = phase(k, n, w);
      const auto i = static_cast<Index>(n), j = static_cast<Index>(k);
      plan->cos_fwd(i, j) = std::cos(a);
      plan->sin_fwd(i, j) = std::sin(a);
      const double herm = (k == 0 || 2 * k == w) ? 1.0 : 2.0;
      plan->cos_inv(j, i) = herm * norm * std::cos(a);
      plan->sin_inv(j, i) = herm * norm * std::sin(a);
    }
  }
  plan->fwd_re.resize(R, H);
  plan->fwd_im.resize(R, H);
  plan->inv_re.resize(H, R);
  plan->inv_im.resize(H, R);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t n = 0; n < h; ++n) {
      const double a = phase(rows[j], n, h);
      const auto i = static_cast<Index>(j), m = static_cast<Index>(n);
      plan->fwd_re(i, m) = std::cos(a);
      plan->fwd_im(i, m) = -std::sin(a);
      plan->inv_re(m, i) = std::cos(a);
      plan->inv_im(m, i) = std::sin(a);
    }
  }
  plan->fwd_adj_re = plan->fwd_re.transpose();
  plan->fwd_adj_im = -plan->fwd_im.transpose();
  plan->inv_adj_re = plan->inv_re.transpose();
  plan->inv_adj_im = -plan->inv_im.transpose();
  return cache.emplace(key, std::move(plan)).first->second;
}

// (dr + i di)[m] += a[m] * (br + i bi)[m], with `a` interleaved complex
// (conjugated when ConjA) and the other operands split into planes.
template <bool ConjA>
void cmul_acc(double* dr, double* di, const double* a, const double* br, const double* bi, std::size_t n) {
  for (std::size_t m = 0; m < n; ++m) {
    const double ar = a[2 * m], ai = ConjA ? -a[2 * m + 1] : a[2 * m + 1];
    dr[m] += ar * br[m] - ai * bi[m];
    di[m] += ar * bi[m] + ai * br[m];
  }
}

// d[m] += conj(a[m]) * b[m] into an interleaved destination.
void cmul_conj_acc(double* d, const double* ar, const double* ai, const double* br, const double* bi,
                   std::size_t n) {
  for (std::size_t m = 0; m < n; ++m) {
    d[2 * m] += ar[m] * br[m] + ai[m] * bi[m];
    d[2 * m + 1] += ar[m] * bi[m] - ai[m] * br[m];
  }
}

// (yr + i yi) = (mr + i mi) * (xr + i xi).
void cgemm(const RowMat& mr, const RowMat& mi, const RowMat& xr, const RowMat& xi, RowMat& yr, RowMat& yi) {
  yr.noalias() = mr * xr;
  yr.noalias() -= mi * xi;
  yi.noalias() = mr * xi;
  yi.noalias() += mi * xr;
}

// Channel-stacked [C*N, K] <-> channel-interleaved [N, C*K], so one GEMM
// applies a column transform to every channel.
RowMat to_wide(const RowMat& a, Index channels) {
  const Index n = a.rows() / channels, k = a.cols();
  RowMat out(n, channels * k);
  for (Index c = 0; c < channels; ++c) out.middleCols(c * k, k) = a.middleRows(c * n, n);
  return out;
}

RowMat from_wide(const RowMat& a, Index channels) {
  const Index n = a.rows(), k = a.cols() / channels;
  RowMat out(channels * n, k);
  for (Index c = 0; c < channels; ++c) out.middleRows(c * n, n) = a.middleCols(c * k, k);
  return out;
}

}  // namespace

void ModeWindow::validate(std::size_t height, std::size_t width) const {
  if (kmax_x < 1 || kmax_y < 1 || kmax_x > width / 2 + 1 || kmax_y > height / 2 + 1) {
    throw ConfigError("mode window (" + std::to_string(kmax_x) + "," + std::to_string(kmax_y) +
                      ") outside [1, N/2+1] for grid " + std::to_string(height) + "x" +
                      std::to_string(width));
  }
}

std::vector<std::size_t> retained_rows(std::size_t height, std::size_t kmax_y) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < height; ++r) {
    if (std::min(r, height - r) < kmax_y) rows.push_back(r);
  }
  return rows;
}

std::size_t retained_cols(std::size_t width, std::size_t kmax_x) {
  return std::min(kmax_x, width / 2 + 1);
}

SpectrumProfile zonal_spectrum(const Tensor& field) {
  ad::NoGradGuard guard;
  const ad::Var s = ad::zonal_spectrum(ad::Var(field));
  auto v = s.value().real();
  return {std::vector<double>(v.begin(), v.end()), field.dim(1)};
}

namespace ad {

Var truncate_modes(const Var& spectrum, const ModeWindow& window) {
  const Tensor& sv = spectrum.value();
  require_complex(sv, "truncate_modes");
  if (sv.rank() < 2) throw DimensionError("truncate_modes: need at least rank 2");
  const std::size_t h = sv.dim(sv.rank() - 2), w = sv.dim(sv.rank() - 1);
  window.validate(h, w);
  std::vector<unsigned char> keep(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      keep[r * w + c] = std::min(r, h - r) < window.kmax_y && std::min(c, w - c) < window.kmax_x;
    }
  }
  Tensor out = sv;
  auto o = out.cdata();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!keep[i % (h * w)]) o[i] = 0.0;
  }
  return make_result(
      std::move(out), {spectrum},
      [keep = std::move(keep)](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        auto dst = p[0]->grad_buffer().cdata();
        auto gv = g.cdata();
        for (std::size_t i = 0; i < dst.size(); ++i) {
          if (keep[i % keep.size()]) dst[i] += gv[i];
        }
      },
      "truncate_modes");
}

Var zonal_spectrum(const Var& field) {
  const Tensor& f = field.value();
  require_real(f, "zonal_spectrum");
  require_rank(f, 2, "zonal_spectrum");
  const std::size_t h = f.dim(0), w = f.dim(1);
  fft::require_pow2(w, "zonal_spectrum width");
  const std::size_t half = w / 2 + 1;
  auto rows = row_half_spectra(f.real(), h, w);
  Tensor out({half});
  auto s = out.real();
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t k = 0; k < half; ++k) s[k] += std::abs(rows[r * half + k]);
  }
  for (double& v : s) v /= static_cast<double>(h);
  return make_result(
      std::move(out), {field},
      [rows = std::move(rows), h, w, half](const Tensor& g, std::span<Node* const> p) {
        if (!p[0]->requires_grad) return;
        auto gs = g.real();
        auto dst = p[0]->grad_buffer().real();
        std::vector<cplx> buf(w);
        for (std::size_t r = 0; r < h; ++r) {
          std::fill(buf.begin(), buf.end(), cplx{});
          for (std::size_t k = 0; k < half; ++k) {
            const cplx z = rows[r * half + k];
            const double mag = std::abs(z);
            if (mag > 0.0) buf[k] = (gs[k] / static_cast<double>(h)) * z / mag;
          }
          fft::transform(buf, true);
          for (std::size_t c = 0; c < w; ++c) dst[r * w + c] += buf[c].real();
        }
      },
      "zonal_spectrum");
}

Var spectral_conv(const Var& x, const Var& weights, const ModeWindow& window) {
  const Tensor& xv = x.value();
  const Tensor& wv = weights.value();
  require_real(xv, "spectral_conv");
  require_complex(wv, "spectral_conv");
  require_rank(xv, 3, "spectral_conv");
  require_rank(wv, 4, "spectral_conv");
  const std::size_t cin = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  fft::require_pow2(h, "spectral_conv height");
  fft::require_pow2(w, "spectral_conv width");
  window.validate(h, w);
  auto plan = conv_plan(h, w, window);
  const std::size_t cout = wv.dim(0);
  if (wv.dim(1) != cin || wv.dim(2) != plan->nrows || wv.dim(3) != plan->ncols) {
    throw DimensionError("spectral_conv: weights " + shape_str(wv.shape()) + " for input " +
                         shape_str(xv.shape()) + " and " + std::to_string(plan->nrows) + "x" +
                         std::to_string(plan->ncols) + " modes");
  }
  const auto H = static_cast<Index>(h), W = static_cast<Index>(w);
  const auto K = static_cast<Index>(plan->ncols), R = static_cast<Index>(plan->nrows);
  const auto CI = static_cast<Index>(cin), CO = static_cast<Index>(cout);

  // Row DFT of every channel, then the retained-row column DFT on the
  // interleaved layout: b[r, c*K + k].
  Eigen::Map<const RowMat> y(xv.raw().data(), CI * H, W);
  RowMat ar(CI * H, K), ai(CI * H, K);
  ar.noalias() = y * plan->cos_fwd;
  ai.noalias() = -(y * plan->sin_fwd);
  RowMat br(R, CI * K), bi(R, CI * K);
  cgemm(plan->fwd_re, plan->fwd_im, to_wide(ar, CI), to_wide(ai, CI), br, bi);

  RowMat zr = RowMat::Zero(R, CO * K), zi = RowMat::Zero(R, CO * K);
  const double* wr = wv.raw().data();
  for (Index r = 0; r < R; ++r) {
    for (Index o = 0; o < CO; ++o) {
      double* dr = zr.data() + (r * CO + o) * K;
      double* di = zi.data() + (r * CO + o) * K;
      for (Index i = 0; i < CI; ++i) {
        cmul_acc<false>(dr, di, wr + 2 * (((o * CI + i) * R + r) * K), br.data() + (r * CI + i) * K,
                        bi.data() + (r * CI + i) * K, plan->ncols);
      }
    }
  }

  RowMat ur(H, CO * K), ui(H, CO * K);
  cgemm(plan->inv_re, plan->inv_im, zr, zi, ur, ui);
  Tensor out({cout, h, w});
  Eigen::Map<RowMat> om(out.raw().data(), CO * H, W);
  om.noalias() = from_wide(ur, CO) * plan->cos_inv;
  om.noalias() -= from_wide(ui, CO) * plan->sin_inv;

  return make_result(
      std::move(out), {x, weights},
      [plan, br = std::move(br), bi = std::move(bi), wnode = weights.shared(), CI, CO](
          const Tensor& g, std::span<Node* const> p) {
        const auto H = static_cast<Index>(plan->height), W = static_cast<Index>(plan->width);
        const auto K = static_cast<Index>(plan->ncols), R = static_cast<Index>(plan->nrows);
        const std::size_t k = plan->ncols;
        Eigen::Map<const RowMat> gm(g.raw().data(), CO * H, W);
        RowMat gur(CO * H, K), gui(CO * H, K);
        gur.noalias() = gm * plan->cos_inv.transpose();
        gui.noalias() = -(gm * plan->sin_inv.transpose());
        RowMat gzr(R, CO * K), gzi(R, CO * K);
        cgemm(plan->inv_adj_re, plan->inv_adj_im, to_wide(gur, CO), to_wide(gui, CO), gzr, gzi);
        if (p[1]->requires_grad) {
          double* gw = p[1]->grad_buffer().raw().data();
          for (Index r = 0; r < R; ++r) {
            for (Index o = 0; o < CO; ++o) {
              const double* zr = gzr.data() + (r * CO + o) * K;
              const double* zi = gzi.data() + (r * CO + o) * K;
              for (Index i = 0; i < CI; ++i) {
                cmul_conj_acc(gw + 2 * (((o * CI + i) * R + r) * K), br.data() + (r * CI + i) * K,
                              bi.data() + (r * CI + i) * K, zr, zi, k);
              }
            }
          }
        }
        if (p[0]->requires_grad) {
          const double* wsrc = wnode->value.raw().data();
          RowMat gbr = RowMat::Zero(R, CI * K), gbi = RowMat::Zero(R, CI * K);
          for (Index r = 0; r < R; ++r) {
            for (Index o = 0; o < CO; ++o) {
              const double* zr = gzr.data() + (r * CO + o) * K;
              const double* zi = gzi.data() + (r * CO + o) * K;
              for (Index i = 0; i < CI; ++i) {
                cmul_acc<true>(gbr.data() + (r * CI + i) * K, gbi.data() + (r * CI + i) * K,
                               wsrc + 2 * (((o * CI + i) * R + r) * K), zr, zi, k);
              }
            }
          }
          RowMat gar(H, CI * K), gai(H, CI * K);
          cgemm(plan->fwd_adj_re, plan->fwd_adj_im, gbr, gbi, gar, gai);
          Eigen::Map<RowMat> gy(p[0]->grad_buffer().raw().data(), CI * H, W);
          gy.noalias() += from_wide(gar, CI) * plan->cos_fwd.transpose();
          gy.noalias() -= from_wide(gai, CI) * plan->sin_fwd.transpose();
        }
      },
      "spectral_conv");
}

}  // namespace ad
}  // namespace oceannet
