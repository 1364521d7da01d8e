#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "makeup/align.hpp"
#include "makeup/image.hpp"
#include "makeup/labels.hpp"

// Procedural face fixtures: an image, its 90 landmarks in canonical order and a
// matching label map, all generated from one geometry so they agree exactly.

namespace makeup::synth {

struct face_params {
  double cx = 0.5, cy = 0.55;  // face centre, fraction of the frame
  double rx = 0.30, ry = 0.38;  // face radii, fraction of the frame
  lab skin{72.0, 12.0, 18.0};
  lab lips{55.0, 30.0, 15.0};
  lab brows{32.0, 4.0, 10.0};
  lab hair{22.0, 3.0, 9.0};
  lab background{86.0, -2.0, 6.0};
  double blush = 0.0;        // added to a on the cheeks
  double eye_shadow = 0.0;   // subtracted from L above the eyes
  double shading = 6.0;      // left-right lightness ramp across the face
  double texture = 1.5;      // amplitude of pixel noise in L
  bool bangs = false;        // hair fringe over the forehead
  std::uint64_t seed = 1;
};

/// Bare-faced subject.
inline face_params plain_subject() { return {}; }

/// Made-up reference with different geometry, color and lighting.
inline face_params made_up_reference() {
  face_params p;
  p.cx = 0.48;
  p.cy = 0.53;
  p.rx = 0.32;
  p.ry = 0.40;
  p.skin = {64.0, 15.0, 14.0};
  p.lips = {40.0, 58.0, 30.0};
  p.brows = {22.0, 3.0, 6.0};
  p.blush = 12.0;
  p.eye_shadow = 18.0;
  p.shading = 14.0;
  p.texture = 2.5;
  p.seed = 7;
  return p;
}

struct face {
  raster_image image;
  landmark_set landmarks;
  label_map labels;
};

namespace detail {

inline double hash_noise(int x, int y, std::uint64_t seed) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(x) * 0xBF58476D1CE4E5B9ull +
                    static_cast<std::uint64_t>(y) * 0x94D049BB133111EBull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) / static_cast<double>(1ull << 53) * 2.0 - 1.0;
}

inline void ellipse_points(std::vector<point2>& out, double cx, double cy, double rx, double ry,
                           int n, double start, double sweep, bool closed) {
  const int steps = closed ? n : n - 1;
  for (int k = 0; k < n; ++k) {
    const double t = start + sweep * k / steps;
    out.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
}

inline bool in_polygon(const std::vector<point2>& poly, std::size_t first, std::size_t last,
                       double x, double y) {
  bool inside = false;
  for (std::size_t i = first, j = last - 1; i < last; j = i++) {
    const point2 &a = poly[i], &b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

inline bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double u = (x - cx) / rx, v = (y - cy) / ry;
  return u * u + v * v <= 1.0;
}

}  // namespace detail

/// Landmarks of a face in canonical order.
inline std::vector<point2> face_landmarks(const face_params& p, int width, int height) {
  const double cx = p.cx * width, cy = p.cy * height;
  const double rx = p.rx * width, ry = p.ry * height;
  const double pi = std::numbers::pi;
  std::vector<point2> pts;
  pts.reserve(landmark_count);
  // Jawline: image-left temple, under the chin, to image-right temple.
  detail::ellipse_points(pts, cx, cy, rx, ry, 21, pi + 0.25, -(pi + 0.5), false);
  detail::ellipse_points(pts, cx - 0.40 * rx, cy - 0.38 * ry, 0.26 * rx, 0.06 * ry, 8, pi, 2 * pi, true);
  detail::ellipse_points(pts, cx + 0.40 * rx, cy - 0.38 * ry, 0.26 * rx, 0.06 * ry, 8, 0.0, 2 * pi, true);
  detail::ellipse_points(pts, cx, cy + 0.02 * ry, 0.14 * rx, 0.26 * ry, 12, -pi / 2, 2 * pi, true);
  detail::ellipse_points(pts, cx - 0.40 * rx, cy - 0.18 * ry, 0.20 * rx, 0.08 * ry, 10, pi, 2 * pi, true);
  detail::ellipse_points(pts, cx + 0.40 * rx, cy - 0.18 * ry, 0.20 * rx, 0.08 * ry, 10, 0.0, 2 * pi, true);
  detail::ellipse_points(pts, cx, cy + 0.52 * ry, 0.34 * rx, 0.13 * ry, 12, pi, 2 * pi, true);
  detail::ellipse_points(pts, cx, cy + 0.52 * ry, 0.22 * rx, 0.035 * ry, 9, pi, 2 * pi, true);
  return pts;
}

inline face render(const face_params& p, int width, int height) {
  const auto pts = face_landmarks(p, width, height);
  const double cx = p.cx * width, cy = p.cy * height;
  const double rx = p.rx * width, ry = p.ry * height;
  const auto group = [&](std::size_t g) { return landmark_groups[g]; };

  label_map labels(width, height);
  lab_image img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double fx = x, fy = y;
      auto cls = facial_class::background;
      const bool in_face = detail::in_ellipse(fx, fy, cx, cy, rx, ry);
      if (!in_face && fy < cy && detail::in_ellipse(fx, fy, cx, cy - 0.05 * ry, 1.18 * rx, 1.22 * ry))
        cls = facial_class::hair;
      if (in_face) {
        cls = facial_class::skin;
        if (p.bangs && fy < cy - 0.55 * ry) cls = facial_class::hair;
        auto in = [&](std::size_t g) { return detail::in_polygon(pts, group(g).first, group(g).last, fx, fy); };
        if (in(1)) cls = facial_class::right_eyebrow;
        if (in(2)) cls = facial_class::left_eyebrow;
        if (in(3)) cls = facial_class::nose;
        if (in(4)) cls = facial_class::right_eye;
        if (in(5)) cls = facial_class::left_eye;
        if (in(6)) cls = fy < cy + 0.52 * ry ? facial_class::upper_lip : facial_class::lower_lip;
        if (in(7)) cls = facial_class::mouth_cavity;
      }
      labels.set(x, y, cls);

      lab c = p.background;
      const double noise = detail::hash_noise(x, y, p.seed);
      switch (cls) {
        case facial_class::background:
          c.L -= 8.0 * fy / height;
          break;
        case facial_class::hair:
          c = p.hair;
          c.L += 3.0 * noise;
          break;
        case facial_class::left_eyebrow:
        case facial_class::right_eyebrow:
          c = p.brows;
          break;
        case facial_class::left_eye:
        case facial_class::right_eye: {
          const double ex = cls == facial_class::right_eye ? cx - 0.40 * rx : cx + 0.40 * rx;
          const double ey = cy - 0.18 * ry;
          c = detail::in_ellipse(fx, fy, ex, ey, 0.07 * rx, 0.07 * rx) ? lab{25.0, 5.0, 12.0}
                                                                          : lab{90.0, 0.0, 2.0};
          break;
        }
        case facial_class::mouth_cavity:
          c = {18.0, 22.0, 8.0};
          break;
        case facial_class::upper_lip:
        case facial_class::lower_lip:
          c = p.lips;
          c.L += p.texture * noise;
          break;
        case facial_class::nose:
        case facial_class::skin: {
          c = p.skin;
          c.L += p.shading * (fx - cx) / rx + p.texture * noise;
          // Soft shadow along the nose sides and under the jaw.
          c.L -= 4.0 * std::exp(-std::pow((fy - (cy + 0.9 * ry)) / (0.08 * ry), 2));
          for (double side : {-1.0, 1.0}) {
            const double bx = cx + side * 0.55 * rx, by = cy + 0.18 * ry;
            const double g = std::exp(-((fx - bx) * (fx - bx) + (fy - by) * (fy - by)) / (2 * 0.04 * rx * rx));
            c.a += p.blush * g;
            const double sx = cx + side * 0.40 * rx, sy = cy - 0.27 * ry;
            const double s = std::exp(-(std::pow((fx - sx) / (0.22 * rx), 2) + std::pow((fy - sy) / (0.07 * ry), 2)));
            c.L -= p.eye_shadow * s;
            c.b -= 0.8 * p.eye_shadow * s;
          }
          break;
        }
      }
      img.set(x, y, c);
    }
  return {lab_to_rgb(clamp_lightness(std::move(img))), landmark_set::validated(pts, width, height),
          std::move(labels)};
}

}  // namespace makeup::synth
