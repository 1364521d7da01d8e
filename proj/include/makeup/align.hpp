#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "makeup/image.hpp"
#include "makeup/image_io.hpp"
#include "makeup/labels.hpp"

namespace makeup {

struct point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const point2&, const point2&) = default;
};

inline constexpr std::size_t landmark_count = 90;

/// Half-open index range of one facial feature in the 90-point ordering.
struct landmark_group {
  const char* name;
  std::size_t first;
  std::size_t last;  // one past the end
};

inline constexpr std::array<landmark_group, 8> landmark_groups{{
    {"jawline", 0, 21},
    {"right_brow", 21, 29},
    {"left_brow", 29, 37},
    {"nose", 37, 49},
    {"right_eye", 49, 59},
    {"left_eye", 59, 69},
    {"outer_lip", 69, 81},
    {"inner_lip", 81, 90},
}};

/// Exactly 90 points, each within [0, width-1] x [0, height-1] (pixel-centre coordinates).
class landmark_set {
 public:
  landmark_set() = default;

  static landmark_set validated(std::vector<point2> points, int width, int height) {
    if (points.size() != landmark_count) throw landmark_count_error(points.size(), landmark_count);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto [x, y] = points[i];
      if (!std::isfinite(x) || !std::isfinite(y) || x < 0.0 || y < 0.0 || x > width - 1 ||
          y > height - 1)
        throw landmark_bounds_error(i, x, y);
    }
    landmark_set out;
    out.points_ = std::move(points);
    return out;
  }

  std::size_t size() const noexcept { return points_.size(); }
  const point2& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<point2>& points() const noexcept { return points_; }

  landmark_set translated(double dx, double dy, int width, int height) const {
    auto pts = points_;
    for (auto& p : pts) {
      p.x += dx;
      p.y += dy;
    }
    return validated(std::move(pts), width, height);
  }

  friend bool operator==(const landmark_set&, const landmark_set&) = default;

 private:
  std::vector<point2> points_;
};

inline landmark_set parse_landmarks(const std::string& text, int width, int height) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("landmarks: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array())
    throw parse_error("landmarks: expected an object with a \"points\" array");
  std::vector<point2> pts;
  for (const auto& p : doc["points"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw parse_error("landmarks: every point must be an [x, y] number pair");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return landmark_set::validated(std::move(pts), width, height);
}

inline landmark_set load_landmarks(const std::filesystem::path& path, int width, int height) {
  const auto bytes = io::read_file(path);
  return parse_landmarks(std::string(bytes.begin(), bytes.end()), width, height);
}

inline landmark_set load_landmarks(const std::filesystem::path& path, const raster_image& image) {
  return load_landmarks(path, image.width(), image.height());
}

inline std::string landmarks_to_json(const landmark_set& lm) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : lm.points()) pts.push_back({p.x, p.y});
  return nlohmann::json{{"points", pts}}.dump(1);
}

// ---------------------------------------------------------------------------
// Triangulation

using triangle = std::array<int, 3>;

struct triangle_mesh {
  std::vector<point2> vertices;
  std::vector<triangle> triangles;  // counter-clockwise in (x right, y down) orient() sense
  friend bool operator==(const triangle_mesh&, const triangle_mesh&) = default;
};

namespace geom {

inline double orient(const point2& a, const point2& b, const point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Positive when d is strictly inside the circumcircle of positively oriented (a, b, c).
inline double incircle(const point2& a, const point2& b, const point2& c, const point2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

inline double area(const point2& a, const point2& b, const point2& c) {
  return 0.5 * orient(a, b, c);
}

/// Barycentric coordinates of p in (a, b, c).
inline std::array<double, 3> barycentric(const point2& a, const point2& b, const point2& c,
                                         const point2& p) {
  const double d = orient(a, b, c);
  const double l0 = orient(p, b, c) / d;
  const double l1 = orient(a, p, c) / d;
  return {l0, l1, 1.0 - l0 - l1};
}

}  // namespace geom

/// The 8 frame anchors: four corners then four edge midpoints.
inline std::array<point2, 8> border_anchors(int width, int height) {
  const double xr = width - 1, yb = height - 1;
  return {{{0, 0}, {xr, 0}, {xr, yb}, {0, yb}, {xr / 2, 0}, {xr, yb / 2}, {xr / 2, yb}, {0, yb / 2}}};
}

inline std::vector<point2> mesh_vertices(const landmark_set& lm, int width, int height) {
  std::vector<point2> v = lm.points();
  for (const auto& a : border_anchors(width, height)) v.push_back(a);
  return v;
}

/// Delaunay triangulation of the landmarks plus the frame anchors.
///
/// Incremental Bowyer-Watson seeded with the two triangles spanning the image
/// rectangle; points are inserted in index order and the result is put in a
/// canonical order, so equal inputs give equal meshes.
inline triangle_mesh build_mesh(const landmark_set& lm, int width, int height) {
  if (width < 2 || height < 2) throw degeneracy_error("mesh needs an image of at least 2x2");
  triangle_mesh mesh;
  mesh.vertices = mesh_vertices(lm, width, height);
  const auto& v = mesh.vertices;
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(v[i].x - v[j].x) <= 1e-6 && std::abs(v[i].y - v[j].y) <= 1e-6)
        throw degeneracy_error("mesh vertices " + std::to_string(i) + " and " + std::to_string(j) +
                               " coincide");

  const int c0 = static_cast<int>(landmark_count);
  auto ccw = [&](triangle t) {
    if (geom::orient(v[t[0]], v[t[1]], v[t[2]]) < 0) std::swap(t[1], t[2]);
    return t;
  };
  std::vector<triangle> tris{ccw({c0, c0 + 1, c0 + 2}), ccw({c0, c0 + 2, c0 + 3})};

  const double scale = std::max(width, height);
  const double on_edge_eps = 1e-12 * scale * scale;

  std::vector<int> order;
  for (int i = c0 + 4; i < n; ++i) order.push_back(i);
  for (int i = 0; i < c0; ++i) order.push_back(i);

  for (int pi : order) {
    const point2& p = v[pi];
    std::vector<char> bad(tris.size(), 0);
    bool found = false;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const auto& tr = tris[t];
      const bool inside = geom::orient(v[tr[0]], v[tr[1]], p) >= -on_edge_eps &&
                          geom::orient(v[tr[1]], v[tr[2]], p) >= -on_edge_eps &&
                          geom::orient(v[tr[2]], v[tr[0]], p) >= -on_edge_eps;
      if (inside) {
        bad[t] = 1;
        found = true;
      }
    }
    if (!found) throw degeneracy_error("vertex " + std::to_string(pi) + " lies outside the frame");

    // Grow the cavity across shared edges while the circumcircle test holds.
    for (bool grew = true; grew;) {
      grew = false;
      std::map<std::pair<int, int>, int> cavity_edges;
      for (std::size_t t = 0; t < tris.size(); ++t)
        if (bad[t])
          for (int e = 0; e < 3; ++e) cavity_edges[{tris[t][e], tris[t][(e + 1) % 3]}] = 1;
      for (std::size_t t = 0; t < tris.size(); ++t) {
        if (bad[t]) continue;
        const auto& tr = tris[t];
        bool adjacent = false;
        for (int e = 0; e < 3 && !adjacent; ++e)
          adjacent = cavity_edges.count({tr[(e + 1) % 3], tr[e]}) > 0;
        if (adjacent && geom::incircle(v[tr[0]], v[tr[1]], v[tr[2]], p) > 0) {
          bad[t] = 1;
          grew = true;
        }
      }
    }

    std::map<std::pair<int, int>, int> edge_count;
    for (std::size_t t = 0; t < tris.size(); ++t)
      if (bad[t])
        for (int e = 0; e < 3; ++e) {
          const int a = tris[t][e], b = tris[t][(e + 1) % 3];
          ++edge_count[{std::min(a, b), std::max(a, b)}];
        }
    std::vector<triangle> next;
    std::vector<triangle> fan;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!bad[t]) {
        next.push_back(tris[t]);
        continue;
      }
      for (int e = 0; e < 3; ++e) {
        const int a = tris[t][e], b = tris[t][(e + 1) % 3];
        if (edge_count[{std::min(a, b), std::max(a, b)}] != 1) continue;
        // A boundary edge through p (p on the frame) spawns no triangle.
        if (geom::orient(v[a], v[b], p) <= on_edge_eps) continue;
        fan.push_back({a, b, pi});
      }
    }
    next.insert(next.end(), fan.begin(), fan.end());
    tris = std::move(next);
  }

  for (auto& t : tris) {
    const auto m = std::min_element(t.begin(), t.end()) - t.begin();
    std::rotate(t.begin(), t.begin() + m, t.end());
    if (std::abs(geom::area(v[t[0]], v[t[1]], v[t[2]])) <= 1e-9)
      throw degeneracy_error("triangulation produced a zero-area triangle");
  }
  std::sort(tris.begin(), tris.end());
  mesh.triangles = std::move(tris);
  return mesh;
}

// ---------------------------------------------------------------------------
// Piecewise-affine warp

/// Source coordinate of every destination pixel.
using coordinate_map = field<point2>;

/// Maps each destination pixel through the affine map of the destination
/// triangle containing it. Connectivity comes from the destination mesh and is
/// reused for the source vertices, so landmark k lands on landmark k.
inline coordinate_map warp_coordinates(const landmark_set& src_lm, int src_w, int src_h,
                                       const landmark_set& dst_lm, int dst_w, int dst_h) {
  const triangle_mesh dst = build_mesh(dst_lm, dst_w, dst_h);
  const auto src = mesh_vertices(src_lm, src_w, src_h);

  struct affine {
    double m[2][3];
  };
  std::vector<affine> maps;
  maps.reserve(dst.triangles.size());
  for (const auto& t : dst.triangles) {
    const point2 &d0 = dst.vertices[t[0]], &d1 = dst.vertices[t[1]], &d2 = dst.vertices[t[2]];
    const double det = geom::orient(d0, d1, d2);
    if (std::abs(det) <= 2e-9) throw degeneracy_error("degenerate destination triangle");
    // Barycentric weights are affine in (x, y): l_i = g_i . (x, y, 1).
    const double g[3][3] = {
        {(d1.y - d2.y) / det, (d2.x - d1.x) / det, (d1.x * d2.y - d2.x * d1.y) / det},
        {(d2.y - d0.y) / det, (d0.x - d2.x) / det, (d2.x * d0.y - d0.x * d2.y) / det},
        {(d0.y - d1.y) / det, (d1.x - d0.x) / det, (d0.x * d1.y - d1.x * d0.y) / det},
    };
    affine a{};
    for (int k = 0; k < 3; ++k) {
      const point2& s = src[t[k]];
      for (int c = 0; c < 3; ++c) {
        a.m[0][c] += s.x * g[k][c];
        a.m[1][c] += s.y * g[k][c];
      }
    }
    maps.push_back(a);
  }

  field<int> owner(dst_w, dst_h, -1);
  const double eps = 1e-9;
  for (std::size_t ti = 0; ti < dst.triangles.size(); ++ti) {
    const auto& t = dst.triangles[ti];
    const point2 &a = dst.vertices[t[0]], &b = dst.vertices[t[1]], &c = dst.vertices[t[2]];
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
    const int x1 = std::min(dst_w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
    const int y1 = std::min(dst_h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (owner(x, y) >= 0) continue;
        const auto l = geom::barycentric(a, b, c, {double(x), double(y)});
        if (l[0] >= -eps && l[1] >= -eps && l[2] >= -eps) owner(x, y) = static_cast<int>(ti);
      }
  }

  coordinate_map out(dst_w, dst_h);
  for (int y = 0; y < dst_h; ++y)
    for (int x = 0; x < dst_w; ++x) {
      int ti = owner(x, y);
      if (ti < 0) {
        // Round-off at a shared edge: take the triangle the pixel is least outside of.
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < dst.triangles.size(); ++k) {
          const auto& t = dst.triangles[k];
          const auto l = geom::barycentric(dst.vertices[t[0]], dst.vertices[t[1]],
                                           dst.vertices[t[2]], {double(x), double(y)});
          const double worst = std::min({l[0], l[1], l[2]});
          if (worst > best) {
            best = worst;
            ti = static_cast<int>(k);
          }
        }
      }
      const auto& m = maps[static_cast<std::size_t>(ti)].m;
      out(x, y) = {m[0][0] * x + m[0][1] * y + m[0][2], m[1][0] * x + m[1][1] * y + m[1][2]};
    }
  return out;
}

/// Bilinear sample of a scalar field with clamped coordinates.
template <typename T>
double sample_bilinear(const field<T>& f, double x, double y) {
  x = std::clamp(x, 0.0, double(f.width() - 1));
  y = std::clamp(y, 0.0, double(f.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, f.width() - 1);
  const int y1 = std::min(y0 + 1, f.height() - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = (1 - fx) * double(f(x0, y0)) + fx * double(f(x1, y0));
  const double bot = (1 - fx) * double(f(x0, y1)) + fx * double(f(x1, y1));
  return (1 - fy) * top + fy * bot;
}

inline rgb8 sample_bilinear(const raster_image& img, double x, double y) {
  x = std::clamp(x, 0.0, double(img.width() - 1));
  y = std::clamp(y, 0.0, double(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0, fy = y - y0;
  const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy), w01 = (1 - fx) * fy, w11 = fx * fy;
  const rgb8 p00 = img(x0, y0), p10 = img(x1, y0), p01 = img(x0, y1), p11 = img(x1, y1);
  auto mix = [&](auto ch) {
    const double v = w00 * (p00.*ch) + w10 * (p10.*ch) + w01 * (p01.*ch) + w11 * (p11.*ch);
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  };
  return {mix(&rgb8::r), mix(&rgb8::g), mix(&rgb8::b)};
}

/// Nearest-neighbour sample with clamped coordinates.
template <typename T>
const T& sample_nearest(const field<T>& f, double x, double y) {
  const int xi = static_cast<int>(std::lround(std::clamp(x, 0.0, double(f.width() - 1))));
  const int yi = static_cast<int>(std::lround(std::clamp(y, 0.0, double(f.height() - 1))));
  return f(xi, yi);
}

inline raster_image warp_image(const raster_image& src, const landmark_set& src_lm,
                               const landmark_set& dst_lm, int dst_w, int dst_h) {
  const auto map = warp_coordinates(src_lm, src.width(), src.height(), dst_lm, dst_w, dst_h);
  raster_image out(dst_w, dst_h);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_bilinear(src, map[i].x, map[i].y);
  return out;
}

/// Nearest-neighbour warp; never produces a value absent from `src`.
template <typename T>
field<T> warp_nearest(const field<T>& src, const landmark_set& src_lm, const landmark_set& dst_lm,
                      int dst_w, int dst_h) {
  const auto map = warp_coordinates(src_lm, src.width(), src.height(), dst_lm, dst_w, dst_h);
  field<T> out(dst_w, dst_h);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_nearest(src, map[i].x, map[i].y);
  return out;
}

/// Label maps stay categorical: nearest-neighbour sampling only.
inline label_map warp_labels(const label_map& src, const landmark_set& src_lm,
                             const landmark_set& dst_lm, int dst_w, int dst_h) {
  return label_map(warp_nearest(src.raw(), src_lm, dst_lm, dst_w, dst_h));
}

/// Bilinear warp of a real-valued field.
inline scalar_field warp_field(const scalar_field& src, const landmark_set& src_lm,
                               const landmark_set& dst_lm, int dst_w, int dst_h) {
  const auto map = warp_coordinates(src_lm, src.width(), src.height(), dst_lm, dst_w, dst_h);
  scalar_field out(dst_w, dst_h);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_bilinear(src, map[i].x, map[i].y);
  return out;
}

}  // namespace makeup
