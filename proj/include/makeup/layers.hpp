#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "makeup/image.hpp"

namespace makeup {

enum class wls_solver {
  automatic,           // direct for images up to 64x64, conjugate gradient above
  conjugate_gradient,
  direct,
};

struct wls_params {
  double lambda = 0.2;
  double alpha = 1.2;     // gradient sensitivity exponent
  double epsilon = 1e-4;
  double cg_tolerance = 1e-4;
  int cg_max_iters = 1000;
  wls_solver solver = wls_solver::automatic;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw range_error("wls lambda must be >= 0");
    if (!(alpha > 0.0)) throw range_error("wls alpha must be > 0");
    if (!(epsilon > 0.0)) throw range_error("wls epsilon must be > 0");
    if (!(cg_tolerance > 0.0)) throw range_error("wls cg_tolerance must be > 0");
    if (cg_max_iters < 1) throw range_error("wls cg_max_iters must be >= 1");
  }
};

inline constexpr int wls_direct_max_side = 64;

/// The system (I + lambda * A) u = L of the WLS smoother.
///
/// A is the weighted graph Laplacian of the 4-neighbour grid. The weight of the
/// edge between p and its right (down) neighbour is 1 / (|dl|^alpha + eps), with
/// dl the difference of the guide log(L + 1) across that edge. Border pixels
/// have no outward edge (Neumann boundary).
class wls_system {
 public:
  wls_system(const scalar_field& guide_L, const wls_params& params)
      : w_(guide_L.width()), h_(guide_L.height()), lambda_(params.lambda),
        wx_(w_, h_, 0.0), wy_(w_, h_, 0.0) {
    scalar_field lg(w_, h_);
    for (std::size_t i = 0; i < lg.size(); ++i) lg[i] = std::log(std::max(guide_L[i], 0.0) + 1.0);
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        if (x + 1 < w_)
          wx_(x, y) = 1.0 / (std::pow(std::abs(lg(x + 1, y) - lg(x, y)), params.alpha) + params.epsilon);
        if (y + 1 < h_)
          wy_(x, y) = 1.0 / (std::pow(std::abs(lg(x, y + 1) - lg(x, y)), params.alpha) + params.epsilon);
      }
  }

  int width() const noexcept { return w_; }
  int height() const noexcept { return h_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(w_) * h_; }

  /// Edge weight to the right neighbour (zero in the last column).
  double weight_x(int x, int y) const { return wx_(x, y); }
  /// Edge weight to the neighbour below (zero in the last row).
  double weight_y(int x, int y) const { return wy_(x, y); }

  /// Magnitude of the off-diagonal entry coupling (x, y) to its right/lower neighbour.
  double coupling_x(int x, int y) const { return lambda_ * wx_(x, y); }
  double coupling_y(int x, int y) const { return lambda_ * wy_(x, y); }

  double diagonal(int x, int y) const {
    double s = wx_(x, y) + wy_(x, y);
    if (x > 0) s += wx_(x - 1, y);
    if (y > 0) s += wy_(x, y - 1);
    return 1.0 + lambda_ * s;
  }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    for (int y = 0; y < h_; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * w_;
      for (int x = 0; x < w_; ++x) {
        const std::size_t i = row + x;
        const double up = u[i];
        double acc = 0.0;
        if (x + 1 < w_) acc += wx_(x, y) * (up - u[i + 1]);
        if (x > 0) acc += wx_(x - 1, y) * (up - u[i - 1]);
        if (y + 1 < h_) acc += wy_(x, y) * (up - u[i + w_]);
        if (y > 0) acc += wy_(x, y - 1) * (up - u[i - w_]);
        out[i] = up + lambda_ * acc;
      }
    }
  }

 private:
  int w_, h_;
  double lambda_;
  scalar_field wx_, wy_;
};

struct wls_result {
  scalar_field smoothed;
  int iterations = 0;        // 0 for the direct solver
  double relative_residual = 0.0;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double relative_residual(const wls_system& sys, const std::vector<double>& u,
                                const std::vector<double>& rhs) {
  std::vector<double> mu(u.size());
  sys.apply(u, mu);
  double rr = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) rr += (rhs[i] - mu[i]) * (rhs[i] - mu[i]);
  const double nb = std::sqrt(dot(rhs, rhs));
  return nb > 0.0 ? std::sqrt(rr) / nb : std::sqrt(rr);
}

/// Jacobi-preconditioned conjugate gradient, started from the right-hand side.
inline wls_result solve_cg(const wls_system& sys, const std::vector<double>& rhs,
                           const wls_params& params) {
  const std::size_t n = rhs.size();
  const int w = sys.width();
  std::vector<double> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i)
    inv_diag[i] = 1.0 / sys.diagonal(static_cast<int>(i % w), static_cast<int>(i / w));

  std::vector<double> u = rhs, r(n), z(n), p(n), q(n);
  sys.apply(u, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
  const double norm_b = std::sqrt(dot(rhs, rhs));
  const double scale = norm_b > 0.0 ? norm_b : 1.0;

  double res = std::sqrt(dot(r, r)) / scale;
  int it = 0;
  if (res > params.cg_tolerance) {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (it < params.cg_max_iters) {
      sys.apply(p, q);
      const double step = rz / dot(p, q);
      for (std::size_t i = 0; i < n; ++i) {
        u[i] += step * p[i];
        r[i] -= step * q[i];
      }
      ++it;
      res = std::sqrt(dot(r, r)) / scale;
      if (res <= params.cg_tolerance) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // The recurrence residual drifts; confirm against the true residual.
    res = relative_residual(sys, u, rhs);
    if (res > params.cg_tolerance) throw convergence_error(it, res);
  }
  return {scalar_field(sys.width(), sys.height(), std::move(u)), it, res};
}

/// Banded Cholesky (half-bandwidth = image width) of the same system.
inline wls_result solve_direct(const wls_system& sys, const std::vector<double>& rhs) {
  const int w = sys.width();
  const int h = sys.height();
  const std::size_t n = rhs.size();
  const std::size_t bw = static_cast<std::size_t>(w);
  // band[i * (bw + 1) + k] holds M(i, i - k) for k in [0, bw].
  std::vector<double> band(n * (bw + 1), 0.0);
  auto at = [&](std::size_t i, std::size_t k) -> double& { return band[i * (bw + 1) + k]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      at(i, 0) = sys.diagonal(x, y);
      if (x > 0) at(i, 1) = -sys.coupling_x(x - 1, y);
      if (y > 0) at(i, bw) = -sys.coupling_y(x, y - 1);
    }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kmax = std::min(bw, i);
    for (std::size_t k = kmax; k >= 1; --k) {
      const std::size_t j = i - k;
      double s = at(i, k);
      const std::size_t lmax = std::min(bw - k, j);
      for (std::size_t l = 1; l <= lmax; ++l) s -= at(i, k + l) * at(j, l);
      at(i, k) = s / at(j, 0);
    }
    double d = at(i, 0);
    for (std::size_t k = 1; k <= kmax; ++k) d -= at(i, k) * at(i, k);
    if (!(d > 0.0)) throw convergence_error(0, std::numeric_limits<double>::infinity());
    at(i, 0) = std::sqrt(d);
  }
  std::vector<double> u = rhs;
  for (std::size_t i = 0; i < n; ++i) {
    double s = u[i];
    for (std::size_t k = 1; k <= std::min(bw, i); ++k) s -= at(i, k) * u[i - k];
    u[i] = s / at(i, 0);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = u[ii];
    for (std::size_t k = 1; k <= bw && ii + k < n; ++k) s -= at(ii + k, k) * u[ii + k];
    u[ii] = s / at(ii, 0);
  }
  const double res = relative_residual(sys, u, rhs);
  return {scalar_field(w, h, std::move(u)), 0, res};
}

}  // namespace detail

/// Edge-preserving smoothing of L; returns the smoothed field with solver statistics.
inline wls_result wls_solve(const scalar_field& L, const wls_params& params) {
  params.validate();
  for (double v : L)
    if (!std::isfinite(v)) throw range_error("wls input contains a non-finite sample");
  if (params.lambda == 0.0) return {L, 0, 0.0};
  const wls_system sys(L, params);
  const std::vector<double> rhs(L.begin(), L.end());
  const bool small = L.width() <= wls_direct_max_side && L.height() <= wls_direct_max_side;
  const bool direct = params.solver == wls_solver::direct ||
                      (params.solver == wls_solver::automatic && small);
  return direct ? detail::solve_direct(sys, rhs) : detail::solve_cg(sys, rhs, params);
}

inline scalar_field wls_filter(const scalar_field& L, const wls_params& params) {
  return wls_solve(L, params).smoothed;
}

/// Structure, detail and color layers of one image.
struct layer_set {
  scalar_field s;  // structure, lightness units
  scalar_field d;  // detail = L - s
  scalar_field a;
  scalar_field b;
};

struct decomposition {
  layer_set layers;
  int solver_iterations = 0;
};

inline decomposition decompose_with_stats(const lab_image& img, const wls_params& params) {
  wls_result r = wls_solve(img.L(), params);
  scalar_field d(img.width(), img.height());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = img.L()[i] - r.smoothed[i];
  return {{std::move(r.smoothed), std::move(d), img.a(), img.b()}, r.iterations};
}

inline layer_set decompose(const lab_image& img, const wls_params& params) {
  return decompose_with_stats(img, params).layers;
}

/// L = s + d without clamping.
inline lab_image recompose_unclamped(const layer_set& layers) {
  require_same_size(layers.s, layers.d, "recompose");
  require_same_size(layers.s, layers.a, "recompose");
  require_same_size(layers.s, layers.b, "recompose");
  scalar_field L(layers.s.width(), layers.s.height());
  for (std::size_t i = 0; i < L.size(); ++i) L[i] = layers.s[i] + layers.d[i];
  return lab_image(std::move(L), layers.a, layers.b);
}

/// L = s + d clamped to [0, 100]; a and b pass through.
inline lab_image recompose(const layer_set& layers) {
  return clamp_lightness(recompose_unclamped(layers));
}

}  // namespace makeup
