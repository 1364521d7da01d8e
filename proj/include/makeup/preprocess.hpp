#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "makeup/image.hpp"

namespace makeup {

/// Signed per-channel offsets, as a fraction of full channel scale.
struct channel_offsets {
  double red = 0.0;
  double green = 0.0;
  double blue = 0.0;
};

struct color_balance_params {
  channel_offsets shadows;
  channel_offsets midtones{0.04, 0.03, 0.02};
  channel_offsets highlights;

  void validate() const {
    for (const auto* band : {&shadows, &midtones, &highlights})
      for (double v : {band->red, band->green, band->blue})
        if (!(v >= -1.0 && v <= 1.0))
          throw range_error("color balance offsets must lie in [-1, 1]");
  }

  static color_balance_params neutral() { return {{}, {}, {}}; }
};

struct bilateral_params {
  double sigma_spatial = 4.0;
  double sigma_range = 8.0;
  int kernel_radius = 8;

  void validate() const {
    if (!(sigma_spatial > 0.0)) throw range_error("bilateral sigma_spatial must be positive");
    if (!(sigma_range > 0.0)) throw range_error("bilateral sigma_range must be positive");
    if (kernel_radius < 1) throw range_error("bilateral kernel_radius must be at least 1");
    if (kernel_radius < static_cast<int>(std::ceil(2.0 * sigma_spatial)))
      throw range_error("bilateral kernel_radius must be at least ceil(2 * sigma_spatial)");
  }
};

/// Shadow/midtone/highlight weights of a lightness value.
struct band_weights {
  double shadows = 0.0;
  double midtones = 0.0;
  double highlights = 0.0;
};

/// Triangular bands centred at L = 0, 50 and 100; they sum to one everywhere.
inline band_weights tonal_bands(double L) {
  const double l = std::clamp(L, 0.0, 100.0);
  const double sh = std::max(0.0, 1.0 - l / 50.0);
  const double hi = std::max(0.0, (l - 50.0) / 50.0);
  return {sh, 1.0 - sh - hi, hi};
}

inline raster_image color_balance(const raster_image& img, const color_balance_params& params) {
  params.validate();
  raster_image out(img.width(), img.height());
  const auto shift = [](std::uint8_t c, double offset) {
    const double v = std::round(c + 255.0 * offset);
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  };
  for (std::size_t i = 0; i < img.size(); ++i) {
    const rgb8 px = img[i];
    const band_weights w = tonal_bands(color::to_lab(px).L);
    const double dr = w.shadows * params.shadows.red + w.midtones * params.midtones.red +
                      w.highlights * params.highlights.red;
    const double dg = w.shadows * params.shadows.green + w.midtones * params.midtones.green +
                      w.highlights * params.highlights.green;
    const double db = w.shadows * params.shadows.blue + w.midtones * params.midtones.blue +
                      w.highlights * params.highlights.blue;
    out[i] = {shift(px.r, dr), shift(px.g, dg), shift(px.b, db)};
  }
  return out;
}

/// Bilateral filter in CIELAB with clamped borders.
///
/// When `mask` is given, only pixels with a non-zero mask value are filtered, and
/// only masked neighbours contribute to them; all other pixels pass through.
inline lab_image bilateral_filter(const lab_image& img, const bilateral_params& params,
                                  const field<std::uint8_t>* mask = nullptr) {
  params.validate();
  if (mask) require_same_size(img.L(), *mask, "bilateral_filter mask");
  const int r = params.kernel_radius;
  const int side = 2 * r + 1;
  std::vector<double> spatial(static_cast<std::size_t>(side) * side);
  const double inv_s = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
  const double inv_r = 1.0 / (2.0 * params.sigma_range * params.sigma_range);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      spatial[static_cast<std::size_t>(dy + r) * side + (dx + r)] = std::exp(-(dx * dx + dy * dy) * inv_s);

  const int w = img.width();
  const int h = img.height();
  const auto& Lf = img.L();
  const auto& af = img.a();
  const auto& bf = img.b();
  lab_image out = img;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask && !(*mask)(x, y)) continue;
      const double L0 = Lf(x, y), a0 = af(x, y), b0 = bf(x, y);
      double sw = 0.0, sL = 0.0, sa = 0.0, sb = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        const double* srow = &spatial[static_cast<std::size_t>(dy + r) * side];
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = std::clamp(x + dx, 0, w - 1);
          if (mask && !(*mask)(xx, yy)) continue;
          const double L1 = Lf(xx, yy), a1 = af(xx, yy), b1 = bf(xx, yy);
          const double d2 = (L1 - L0) * (L1 - L0) + (a1 - a0) * (a1 - a0) + (b1 - b0) * (b1 - b0);
          const double wt = srow[dx + r] * std::exp(-d2 * inv_r);
          sw += wt;
          sL += wt * L1;
          sa += wt * a1;
          sb += wt * b1;
        }
      }
      out.set(x, y, {sL / sw, sa / sw, sb / sw});
    }
  }
  return out;
}

}  // namespace makeup
