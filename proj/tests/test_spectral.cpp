#include <gtest/gtest.h>

#include "oceannet/errors.hpp"
#include "oceannet/spectral.hpp"
#include "oracles.hpp"

namespace oceannet {
namespace {

using testing::direct_dft2;
using testing::random_complex;
using testing::random_real;

// Reference spectral convolution assembled from direct DFTs: build the full
// multiplier plane (with the conjugate mirror for negative k_x), multiply,
// invert and take the real part.
Tensor reference_conv(const Tensor& x, const Tensor& w, const ModeWindow& win) {
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2), cout = w.dim(0);
  const auto rows = retained_rows(h, win.kmax_y);
  const std::size_t ncols = retained_cols(wd, win.kmax_x);
  auto weight = [&](std::size_t o, std::size_t c, std::size_t ky, std::size_t kx) -> cplx {
    const std::size_t my = std::min(ky, h - ky), mx = std::min(kx, wd - kx);
    if (my >= win.kmax_y || mx >= win.kmax_x) return 0.0;
    const bool mirror = kx > wd / 2;
    const std::size_t ry = mirror ? (h - ky) % h : ky, cx = mirror ? wd - kx : kx;
    std::size_t r = 0;
    while (rows[r] != ry) ++r;
    const cplx v = w.cdata()[((o * cin + c) * rows.size() + r) * ncols + cx];
    return mirror ? std::conj(v) : v;
  };
  Tensor out({cout, h, wd});
  for (std::size_t o = 0; o < cout; ++o) {
    std::vector<cplx> acc(h * wd);
    for (std::size_t c = 0; c < cin; ++c) {
      std::vector<cplx> plane(h * wd);
      for (std::size_t i = 0; i < h * wd; ++i) plane[i] = x.real()[c * h * wd + i];
      const auto spec = direct_dft2(plane, h, wd, false);
      for (std::size_t ky = 0; ky < h; ++ky)
        for (std::size_t kx = 0; kx < wd; ++kx) acc[ky * wd + kx] += weight(o, c, ky, kx) * spec[ky * wd + kx];
    }
    const auto back = direct_dft2(acc, h, wd, true);
    for (std::size_t i = 0; i < h * wd; ++i) out.real()[o * h * wd + i] = back[i].real() / static_cast<double>(h * wd);
  }
  return out;
}

Tensor conv_value(const Tensor& x, const Tensor& w, const ModeWindow& win) {
  ad::NoGradGuard guard;
  return ad::spectral_conv(ad::Var(x), ad::Var(w), win).value();
}

Shape weight_shape(std::size_t cout, std::size_t cin, std::size_t h, std::size_t w, const ModeWindow& win) {
  return {cout, cin, retained_rows(h, win.kmax_y).size(), retained_cols(w, win.kmax_x)};
}

TEST(RetainedModes, RowsAndColumns) {
  EXPECT_EQ(retained_rows(8, 3), (std::vector<std::size_t>{0, 1, 2, 6, 7}));
  EXPECT_EQ(retained_rows(8, 5), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(retained_cols(8, 3), 3u);
  EXPECT_EQ(retained_cols(8, 5), 5u);
}

TEST(ModeWindow, RejectsOutOfRange) {
  EXPECT_THROW((ModeWindow{0, 2}.validate(8, 8)), ConfigError);
  EXPECT_THROW((ModeWindow{6, 2}.validate(8, 8)), ConfigError);
  EXPECT_NO_THROW((ModeWindow{5, 5}.validate(8, 8)));
}

struct ConvCase {
  std::size_t cin, cout, h, w, kx, ky;
};

class SpectralConvReference : public ::testing::TestWithParam<ConvCase> {};

TEST_P(SpectralConvReference, MatchesDirectTransform) {
  const auto c = GetParam();
  const ModeWindow win{c.kx, c.ky};
  const Tensor x = random_real({c.cin, c.h, c.w}, 11);
  const Tensor w = random_complex(weight_shape(c.cout, c.cin, c.h, c.w, win), 12);
  const Tensor got = conv_value(x, w, win);
  const Tensor want = reference_conv(x, w, win);
  EXPECT_LT(testing::max_rel_error(got.raw(), want.raw()), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Windows, SpectralConvReference,
                         ::testing::Values(ConvCase{2, 3, 8, 8, 3, 3}, ConvCase{1, 1, 8, 8, 5, 5},
                                           ConvCase{3, 2, 8, 16, 4, 2}, ConvCase{2, 2, 16, 8, 1, 1}));

TEST(SpectralConv, FullWindowEqualsCircularConvolution) {
  const std::size_t n = 8, cin = 2, cout = 2;
  const ModeWindow win = ModeWindow::full(n, n);
  const Tensor x = random_real({cin, n, n}, 3);
  const Tensor kernel = random_real({cout, cin, n, n}, 4);
  // Weights are the kernel's DFT at the stored (k_y, k_x >= 0) modes.
  Tensor w(weight_shape(cout, cin, n, n, win), DType::Complex128);
  const std::size_t ncols = w.dim(3);
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t c = 0; c < cin; ++c) {
      std::vector<cplx> plane(n * n);
      for (std::size_t i = 0; i < n * n; ++i) plane[i] = kernel.real()[(o * cin + c) * n * n + i];
      const auto spec = direct_dft2(plane, n, n, false);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < ncols; ++k) w.cdata()[((o * cin + c) * n + r) * ncols + k] = spec[r * n + k];
    }
  }
  const Tensor got = conv_value(x, w, win);
  double err = 0.0;
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cin; ++c)
          for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
              acc += kernel.real()[((o * cin + c) * n + p) * n + q] * x.at(c, (i + n - p) % n, (j + n - q) % n);
        err = std::max(err, std::abs(acc - got.at(o, i, j)));
      }
    }
  }
  EXPECT_LT(err, 1e-8);
}

TEST(SpectralConv, GradientsMatchFiniteDifferences) {
  const ModeWindow win{3, 2};
  const Tensor x = random_real({2, 8, 8}, 21);
  const Tensor w = random_complex(weight_shape(3, 2, 8, 8, win), 22);
  const Tensor r = random_real({3, 8, 8}, 23);
  auto loss = [&](const Tensor& xv, const Tensor& wv) {
    ad::NoGradGuard guard;
    return testing::probe_loss(ad::spectral_conv(ad::Var(xv), ad::Var(wv), win), r).value().item();
  };
  const auto px = ad::Var::parameter("x", x), pw = ad::Var::parameter("w", w);
  const std::vector<ad::Var> params{px, pw};
  const auto grads = ad::backward(testing::probe_loss(ad::spectral_conv(px, pw, win), r), params);
  const auto nx = testing::numeric_gradient([&](const Tensor& t) { return loss(t, w); }, x);
  const auto nw = testing::numeric_gradient([&](const Tensor& t) { return loss(x, t); }, w);
  EXPECT_LT(testing::max_rel_error(grads.at("x").raw(), nx), 1e-6);
  EXPECT_LT(testing::max_rel_error(grads.at("w").raw(), nw), 1e-6);
}

TEST(SpectralConv, RejectsMismatchedWeights) {
  const Tensor x = random_real({2, 8, 8}, 1);
  const Tensor w = random_complex({3, 2, 4, 3}, 2);
  EXPECT_THROW(conv_value(x, w, ModeWindow{3, 3}), DimensionError);
  EXPECT_THROW(conv_value(random_real({2, 8, 6}, 1), w, ModeWindow{3, 3}), ConfigError);
}

TEST(ZonalSpectrum, SinusoidGivesSingleSpike) {
  const std::size_t h = 8, w = 16, k0 = 3;
  Tensor f({h, w});
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      f.at(i, j) = 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k0 * j) / static_cast<double>(w));
  const auto s = zonal_spectrum(f);
  ASSERT_EQ(s.values.size(), w / 2 + 1);
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    EXPECT_NEAR(s.values[k], k == k0 ? static_cast<double>(w) : 0.0, 1e-10) << "k=" << k;
  }
}

TEST(ZonalSpectrum, GradientMatchesFiniteDifferences) {
  const Tensor f = random_real({4, 8}, 31);
  const Tensor r = random_real({5}, 32);
  const auto pf = ad::Var::parameter("f", f);
  const std::vector<ad::Var> params{pf};
  const auto g = ad::backward(testing::probe_loss(ad::zonal_spectrum(pf), r), params);
  const auto n = testing::numeric_gradient(
      [&](const Tensor& t) {
        ad::NoGradGuard guard;
        return testing::probe_loss(ad::zonal_spectrum(ad::Var(t)), r).value().item();
      },
      f);
  EXPECT_LT(testing::max_rel_error(g.at("f").raw(), n), 1e-6);
}

TEST(TruncateModes, KeepsOnlyCornerBlocks) {
  const Tensor z = random_complex({8, 8}, 41);
  ad::NoGradGuard guard;
  const Tensor t = ad::truncate_modes(ad::Var(z), ModeWindow{2, 3}).value();
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 8; ++c) {
      const bool keep = std::min(r, 8 - r) < 3 && std::min(c, 8 - c) < 2;
      EXPECT_EQ(t.cdata()[r * 8 + c], keep ? z.cdata()[r * 8 + c] : cplx{});
    }
  }
}

TEST(TruncateModes, ExamplesAndIdempotence) {
  ad::NoGradGuard guard;
  const Tensor z = random_complex({2, 8, 8}, 42);
  auto trunc = [](const Tensor& t, ModeWindow w) { return ad::truncate_modes(ad::Var(t), w).value(); };
  EXPECT_TRUE(trunc(z, ModeWindow::full(8, 8)).identical(z));
  const Tensor once = trunc(z, ModeWindow{3, 2});
  EXPECT_TRUE(trunc(once, ModeWindow{3, 2}).identical(once));

  // k_x = 5 on a 16-wide grid sits outside |k_x| < 4.
  Tensor mode({1, 16, 16}, DType::Complex128);
  std::vector<cplx> plane(256);
  for (std::size_t j = 0; j < 16; ++j)
    for (std::size_t i = 0; i < 16; ++i) plane[i * 16 + j] = std::cos(2.0 * std::numbers::pi * 5.0 * static_cast<double>(j) / 16.0);
  const auto spec = direct_dft2(plane, 16, 16, false);
  std::copy(spec.begin(), spec.end(), mode.cdata().begin());
  const Tensor cut = trunc(mode, ModeWindow{4, 9});
  for (const auto& v : cut.cdata()) EXPECT_LT(std::abs(v), 1e-10);

  Tensor flat({1, 8, 8}, DType::Complex128);
  flat.cdata()[0] = cplx(64.0 * 1.5, 0.0);
  EXPECT_TRUE(trunc(flat, ModeWindow{1, 1}).identical(flat));
}

TEST(ZonalSpectrum, ConstantAndSineClosedForms) {
  const Tensor c = Tensor::full({4, 64}, 0.75);
  const auto sc = zonal_spectrum(c).values;
  EXPECT_NEAR(sc[0], 64.0 * 0.75, 1e-12);
  for (std::size_t k = 1; k < sc.size(); ++k) EXPECT_LT(sc[k], 1e-12);
  Tensor s({4, 32});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 32; ++j) s.at(i, j) = std::sin(2.0 * std::numbers::pi * 3.0 * static_cast<double>(j) / 32.0);
  const auto ss = zonal_spectrum(s).values;
  for (std::size_t k = 0; k < ss.size(); ++k) EXPECT_NEAR(ss[k], k == 3 ? 16.0 : 0.0, 1e-12);
}

TEST(ZonalSpectrum, NotAdditiveAndMatchesDirectSum) {
  const Tensor a = random_real({8, 8}, 51), b = random_real({8, 8}, 52);
  Tensor ab = a;
  for (std::size_t i = 0; i < 64; ++i) ab.raw()[i] += b.raw()[i];
  auto direct = [](const Tensor& f) {
    std::vector<double> s(5);
    for (std::size_t r = 0; r < 8; ++r) {
      std::vector<cplx> row(8);
      for (std::size_t c = 0; c < 8; ++c) row[c] = f.at(r, c);
      const auto t = direct_dft2(row, 1, 8, false);
      for (std::size_t k = 0; k < 5; ++k) s[k] += std::abs(t[k]) / 8.0;
    }
    return s;
  };
  const auto sa = zonal_spectrum(a).values, sb = zonal_spectrum(b).values, sab = zonal_spectrum(ab).values;
  const auto want = direct(ab);
  double gap = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(sab[k], want[k], 1e-12);
    gap = std::max(gap, std::abs(sab[k] - sa[k] - sb[k]));
  }
  EXPECT_GT(gap, 1e-3);
}

}  // namespace
}  // namespace oceannet
