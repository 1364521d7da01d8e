#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "makeup/field.hpp"

namespace makeup {

struct rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const rgb8&, const rgb8&) = default;
};

/// 8-bit sRGB raster.
using raster_image = field<rgb8>;

struct lab {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Floating-point CIELAB image stored as three planes.
class lab_image {
 public:
  lab_image() = default;
  lab_image(int width, int height)
      : L_(width, height, 0.0), a_(width, height, 0.0), b_(width, height, 0.0) {}
  lab_image(scalar_field L, scalar_field a, scalar_field b)
      : L_(std::move(L)), a_(std::move(a)), b_(std::move(b)) {
    require_same_size(L_, a_, "lab_image");
    require_same_size(L_, b_, "lab_image");
  }

  int width() const noexcept { return L_.width(); }
  int height() const noexcept { return L_.height(); }

  const scalar_field& L() const noexcept { return L_; }
  const scalar_field& a() const noexcept { return a_; }
  const scalar_field& b() const noexcept { return b_; }
  scalar_field& L() noexcept { return L_; }
  scalar_field& a() noexcept { return a_; }
  scalar_field& b() noexcept { return b_; }

  lab at(int x, int y) const { return {L_(x, y), a_(x, y), b_(x, y)}; }
  void set(int x, int y, const lab& v) {
    L_(x, y) = v.L;
    a_(x, y) = v.a;
    b_(x, y) = v.b;
  }

  friend bool operator==(const lab_image&, const lab_image&) = default;

 private:
  scalar_field L_, a_, b_;
};

namespace color {

// sRGB primaries to XYZ, D65 white, 2 degree observer.
inline constexpr std::array<std::array<double, 3>, 3> rgb_to_xyz_matrix{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

inline constexpr std::array<std::array<double, 3>, 3> xyz_to_rgb_matrix{{
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
}};

// Reference white is the image of RGB (1,1,1), so white lands exactly on a = b = 0.
inline constexpr double white_x = 0.4124564 + 0.3575761 + 0.1804375;
inline constexpr double white_y = 1.0;
inline constexpr double white_z = 0.0193339 + 0.1191920 + 0.9503041;

inline constexpr double lab_delta = 6.0 / 29.0;

inline double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t) {
  return t > lab_delta * lab_delta * lab_delta ? std::cbrt(t)
                                               : t / (3.0 * lab_delta * lab_delta) + 4.0 / 29.0;
}

inline double lab_f_inv(double t) {
  return t > lab_delta ? t * t * t : 3.0 * lab_delta * lab_delta * (t - 4.0 / 29.0);
}

inline lab to_lab(rgb8 px) {
  const double rl = srgb_to_linear(px.r / 255.0);
  const double gl = srgb_to_linear(px.g / 255.0);
  const double bl = srgb_to_linear(px.b / 255.0);
  const auto& m = rgb_to_xyz_matrix;
  const double x = m[0][0] * rl + m[0][1] * gl + m[0][2] * bl;
  // Luminance row sums to 1.0000001; normalize so white is exactly L = 100.
  const double y = (m[1][0] * rl + m[1][1] * gl + m[1][2] * bl) / 1.0000001;
  const double z = m[2][0] * rl + m[2][1] * gl + m[2][2] * bl;
  const double fx = lab_f(x / white_x);
  const double fy = lab_f(y / white_y);
  const double fz = lab_f(z / white_z);
  return {std::clamp(116.0 * fy - 16.0, 0.0, 100.0), 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline std::uint8_t quantize(double c) {
  const double v = std::round(std::clamp(c, 0.0, 1.0) * 255.0);
  return static_cast<std::uint8_t>(v);
}

inline rgb8 to_rgb(const lab& v) {
  const double L = std::isfinite(v.L) ? v.L : 0.0;
  const double a = std::isfinite(v.a) ? v.a : 0.0;
  const double b = std::isfinite(v.b) ? v.b : 0.0;
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;
  const double x = white_x * lab_f_inv(fx);
  const double y = white_y * lab_f_inv(fy) * 1.0000001;
  const double z = white_z * lab_f_inv(fz);
  const auto& m = xyz_to_rgb_matrix;
  const double rl = m[0][0] * x + m[0][1] * y + m[0][2] * z;
  const double gl = m[1][0] * x + m[1][1] * y + m[1][2] * z;
  const double bl = m[2][0] * x + m[2][1] * y + m[2][2] * z;
  // Clamp in linear light first: pow() of a negative is NaN.
  auto enc = [](double c) { return quantize(linear_to_srgb(std::clamp(c, 0.0, 1.0))); };
  return {enc(rl), enc(gl), enc(bl)};
}

}  // namespace color

inline lab_image rgb_to_lab(const raster_image& img) {
  lab_image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set(x, y, color::to_lab(img(x, y)));
  return out;
}

/// Out-of-gamut colors are clamped per channel.
inline raster_image lab_to_rgb(const lab_image& img) {
  raster_image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(x, y) = color::to_rgb(img.at(x, y));
  return out;
}

struct lab_planes {
  scalar_field L, a, b;
};

inline lab_planes split_luminance(const lab_image& img) { return {img.L(), img.a(), img.b()}; }

inline lab_image merge_lab(scalar_field L, scalar_field a, scalar_field b) {
  return lab_image(std::move(L), std::move(a), std::move(b));
}

/// Copy of `img` with L clamped to [0, 100].
inline lab_image clamp_lightness(lab_image img) {
  for (auto& v : img.L()) v = std::clamp(v, 0.0, 100.0);
  return img;
}

}  // namespace makeup
