#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "makeup/image.hpp"
#include "makeup/image_io.hpp"
#include "makeup/labels.hpp"

namespace makeup {

/// C1 receives makeup, C2 is kept from the input, ignore is outside the face.
enum class region : std::uint8_t { ignore = 0, c1 = 1, c2 = 2 };

using region_map = field<region>;

inline constexpr region region_of(facial_class c) noexcept {
  switch (c) {
    case facial_class::skin:
    case facial_class::upper_lip:
    case facial_class::lower_lip:
    case facial_class::left_eyebrow:
    case facial_class::right_eyebrow:
    case facial_class::nose:
      return region::c1;
    case facial_class::left_eye:
    case facial_class::right_eye:
    case facial_class::mouth_cavity:
      return region::c2;
    case facial_class::hair:
    case facial_class::background:
      break;
  }
  return region::ignore;
}

inline label_map load_label_map(const std::filesystem::path& path, int expected_w, int expected_h) {
  auto raw = io::load_gray(path);
  if (raw.width() != expected_w || raw.height() != expected_h)
    throw dimension_error(path.string() + ": label map is " + std::to_string(raw.width()) + "x" +
                          std::to_string(raw.height()) + ", expected " +
                          std::to_string(expected_w) + "x" + std::to_string(expected_h));
  return label_map(std::move(raw));
}

inline label_map decode_label_map(std::span<const std::uint8_t> png, int expected_w, int expected_h) {
  auto raw = io::decode_gray(png, "label map");
  if (raw.width() != expected_w || raw.height() != expected_h)
    throw dimension_error("label map is " + std::to_string(raw.width()) + "x" +
                          std::to_string(raw.height()) + ", expected " +
                          std::to_string(expected_w) + "x" + std::to_string(expected_h));
  return label_map(std::move(raw));
}

inline region_map classify_regions(const label_map& labels) {
  region_map out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = region_of(labels[i]);
  return out;
}

/// Per-class probability fields; they sum to one at every pixel.
class soft_mask {
 public:
  soft_mask(int width, int height) {
    for (auto& f : classes_) f = scalar_field(width, height, 0.0);
  }

  int width() const noexcept { return classes_[0].width(); }
  int height() const noexcept { return classes_[0].height(); }

  const scalar_field& operator[](facial_class c) const { return classes_[static_cast<int>(c)]; }
  scalar_field& operator[](facial_class c) { return classes_[static_cast<int>(c)]; }
  const scalar_field& channel(int c) const { return classes_.at(static_cast<std::size_t>(c)); }
  scalar_field& channel(int c) { return classes_.at(static_cast<std::size_t>(c)); }

  /// Hard mask as one-hot probabilities.
  static soft_mask one_hot(const label_map& labels) {
    soft_mask m(labels.width(), labels.height());
    for (std::size_t i = 0; i < labels.size(); ++i)
      m.classes_[static_cast<int>(labels[i])][i] = 1.0;
    return m;
  }

  facial_class argmax(int x, int y) const {
    int best = 0;
    for (int c = 1; c < class_count; ++c)
      if (classes_[c](x, y) > classes_[best](x, y)) best = c;
    return static_cast<facial_class>(best);
  }

 private:
  std::array<scalar_field, class_count> classes_;
};

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable convolution with replicate borders.
inline scalar_field convolve_separable(const scalar_field& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  const int w = in.width(), h = in.height();
  scalar_field tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * in.clamped(x + i, y);
      tmp(x, y) = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp.clamped(x, y + i);
      out(x, y) = s;
    }
  return out;
}

}  // namespace detail

inline constexpr double default_soften_sigma = 6.0;

/// Gaussian-blurred one-hot encoding, renormalised per pixel.
inline soft_mask soften(const label_map& labels, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw range_error("soften sigma must be positive");
  const auto kernel = detail::gaussian_kernel(sigma);
  const soft_mask hard = soft_mask::one_hot(labels);
  soft_mask out(labels.width(), labels.height());
  std::array<bool, class_count> present{};
  for (std::size_t i = 0; i < labels.size(); ++i) present[static_cast<int>(labels[i])] = true;
  for (int c = 0; c < class_count; ++c)
    if (present[c]) out.channel(c) = detail::convolve_separable(hard.channel(c), kernel);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double sum = 0.0;
    for (int c = 0; c < class_count; ++c) sum += out.channel(c)[i];
    for (int c = 0; c < class_count; ++c) {
      auto& v = out.channel(c)[i];
      v = std::clamp(v / sum, 0.0, 1.0);
    }
  }
  return out;
}

/// Which classes the fused result keeps from the input and which from the makeup result.
class retention_policy {
 public:
  using class_set = std::bitset<class_count>;

  retention_policy(class_set input_classes, class_set makeup_classes)
      : input_(input_classes), makeup_(makeup_classes) {
    if ((input_ & makeup_).any())
      throw config_error("retention policy class sets overlap");
    if ((input_ | makeup_).count() != class_count)
      throw config_error("retention policy class sets must cover all classes");
  }

  /// Eyes, mouth cavity, hair and background from the input; skin, brows, nose and lips from makeup.
  static retention_policy air_bangs() {
    class_set in;
    for (auto c : {facial_class::left_eye, facial_class::right_eye, facial_class::mouth_cavity,
                   facial_class::hair, facial_class::background})
      in.set(static_cast<std::size_t>(c));
    return {in, ~in};
  }

  bool keeps_input(facial_class c) const { return input_.test(static_cast<std::size_t>(c)); }
  bool keeps_makeup(facial_class c) const { return makeup_.test(static_cast<std::size_t>(c)); }
  const class_set& input_classes() const noexcept { return input_; }
  const class_set& makeup_classes() const noexcept { return makeup_; }

 private:
  class_set input_;
  class_set makeup_;
};

/// Per-pixel convex combination of input and makeup weighted by retained class probability.
inline raster_image fuse(const raster_image& input, const raster_image& makeup, const soft_mask& soft,
                         const retention_policy& policy) {
  require_same_size(input, makeup, "fuse");
  if (soft.width() != input.width() || soft.height() != input.height())
    throw dimension_error("fuse: soft mask size differs from image size");
  raster_image out(input.width(), input.height());
  for (std::size_t i = 0; i < input.size(); ++i) {
    double w_in = 0.0, w_mk = 0.0;
    for (int c = 0; c < class_count; ++c) {
      const double p = soft.channel(c)[i];
      if (policy.keeps_input(static_cast<facial_class>(c)))
        w_in += p;
      else
        w_mk += p;
    }
    const double total = w_in + w_mk;
    w_in /= total;
    w_mk = 1.0 - w_in;
    const rgb8 a = input[i], b = makeup[i];
    auto mix = [&](std::uint8_t u, std::uint8_t v) {
      return static_cast<std::uint8_t>(std::clamp(std::round(w_in * u + w_mk * v), 0.0, 255.0));
    };
    out[i] = {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
  }
  return out;
}

}  // namespace makeup
