#pragma once

// Independent reference computations used only by tests. Nothing here calls the
// library code path it is compared against.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "makeup/makeup.hpp"

namespace oracle {

using makeup::scalar_field;

/// Dense assembly and LU solve of the WLS normal equations, straight from the objective
///   sum (u - L)^2 + lambda * sum_edges w_e (u_q - u_p)^2.
inline scalar_field wls_dense(const scalar_field& L, double lambda, double alpha, double eps) {
  const int w = L.width(), h = L.height(), n = w * h;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs(n);
  auto idx = [w](int x, int y) { return y * w + x; };
  auto guide = [&](int x, int y) { return std::log(std::max(L(x, y), 0.0) + 1.0); };
  auto add_edge = [&](int p, int q, double weight) {
    M(p, p) += lambda * weight;
    M(q, q) += lambda * weight;
    M(p, q) -= lambda * weight;
    M(q, p) -= lambda * weight;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      rhs(idx(x, y)) = L(x, y);
      if (x + 1 < w)
        add_edge(idx(x, y), idx(x + 1, y), 1.0 / (std::pow(std::abs(guide(x + 1, y) - guide(x, y)), alpha) + eps));
      if (y + 1 < h)
        add_edge(idx(x, y), idx(x, y + 1), 1.0 / (std::pow(std::abs(guide(x, y + 1) - guide(x, y)), alpha) + eps));
    }
  const Eigen::VectorXd u = M.partialPivLu().solve(rhs);
  scalar_field out(w, h);
  for (int i = 0; i < n; ++i) out[i] = u(i);
  return out;
}

/// Literal windowed sum of the bilateral filter on one plane set.
inline makeup::lab bilateral_at(const makeup::lab_image& img, int x, int y, double ss, double sr, int r) {
  double sw = 0, sL = 0, sa = 0, sb = 0;
  const auto c = img.at(x, y);
  for (int j = y - r; j <= y + r; ++j)
    for (int i = x - r; i <= x + r; ++i) {
      const int xi = std::clamp(i, 0, img.width() - 1), yj = std::clamp(j, 0, img.height() - 1);
      const auto q = img.at(xi, yj);
      const double ds = (i - x) * (i - x) + (j - y) * (j - y);
      const double dr = (q.L - c.L) * (q.L - c.L) + (q.a - c.a) * (q.a - c.a) + (q.b - c.b) * (q.b - c.b);
      const double wt = std::exp(-ds / (2 * ss * ss)) * std::exp(-dr / (2 * sr * sr));
      sw += wt;
      sL += wt * q.L;
      sa += wt * q.a;
      sb += wt * q.b;
    }
  return {sL / sw, sa / sw, sb / sw};
}

/// Normalised 2-D Gaussian blur over a (2r+1)^2 window with clamped borders.
inline double gaussian_blur_at(const scalar_field& f, int x, int y, double sigma, int r) {
  double sw = 0, s = 0;
  for (int j = -r; j <= r; ++j)
    for (int i = -r; i <= r; ++i) {
      const double wt = std::exp(-(i * i + j * j) / (2 * sigma * sigma));
      sw += wt;
      s += wt * f.clamped(x + i, y + j);
    }
  return s / sw;
}

/// Color blend evaluated per pixel.
inline double eq_color(double in, double ref, bool c1, double alpha) {
  if (!c1) return in;
  return (1 - alpha) * in + alpha * ref;
}

/// Illumination rule with squared difference and clamp to [ref, in].
inline double eq_illumination(double in, double ref, bool c1, double beta) {
  if (!c1) return in;
  if (in > ref) {
    double v = in - (in - ref) * (in - ref) / beta;
    if (v < ref) v = ref;
    if (v > in) v = in;
    return v;
  }
  return in;
}

inline scalar_field random_field(std::mt19937& rng, int w, int h, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  scalar_field f(w, h);
  for (auto& v : f) v = d(rng);
  return f;
}

inline makeup::region_map random_regions(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> d(0, 2);
  makeup::region_map r(w, h);
  for (auto& v : r) v = static_cast<makeup::region>(d(rng));
  return r;
}

/// 1-D discrete Gaussian mass at offsets <= 0 relative to a boundary `k` pixels away.
inline double discrete_step_response(double sigma, int offset_to_boundary) {
  const int r = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  double total = 0, left = 0;
  for (int i = -r; i <= r; ++i) {
    const double g = std::exp(-0.5 * i * i / (sigma * sigma));
    total += g;
    if (i < offset_to_boundary) left += g;
  }
  return left / total;
}

/// Standard normal CDF.
inline double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Small random similarity about the image center (rotation within 0.05 rad, scale
/// within 3%, shift within 3 px) plus independent jitter of up to 0.5 px per point.
inline makeup::landmark_set perturbed(const makeup::landmark_set& lm, std::mt19937& rng, int w, int h) {
  std::uniform_real_distribution<double> rot(-0.05, 0.05), scale(0.97, 1.03), shift(-3.0, 3.0), jitter(-0.5, 0.5);
  const double th = rot(rng), s = scale(rng), tx = shift(rng), ty = shift(rng);
  const double cx = w / 2.0, cy = h / 2.0;
  auto pts = lm.points();
  for (auto& p : pts) {
    const double dx = p.x - cx, dy = p.y - cy;
    p = {cx + tx + s * (std::cos(th) * dx - std::sin(th) * dy) + jitter(rng),
         cy + ty + s * (std::sin(th) * dx + std::cos(th) * dy) + jitter(rng)};
  }
  return makeup::landmark_set::validated(pts, w, h);
}

}  // namespace oracle
