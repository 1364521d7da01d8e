#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "makeup/error.hpp"

namespace makeup {

/// Column/row index of a pixel, top-left origin.
struct pixel_coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const pixel_coord&, const pixel_coord&) = default;
};

/// Dense row-major 2-D grid of samples.
template <typename T>
class field {
 public:
  using value_type = T;

  field() = default;
  field(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw dimension_error("field dimensions must be positive, got " + std::to_string(width) +
                            "x" + std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  field(int width, int height, std::vector<T> values) : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw dimension_error("field dimensions must be positive");
    if (values.size() != static_cast<std::size_t>(width) * height)
      throw dimension_error("field buffer holds " + std::to_string(values.size()) +
                            " samples, expected " + std::to_string(width * height));
    data_ = std::move(values);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Sample with coordinates clamped to the grid (replicate border).
  const T& clamped(int x, int y) const {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  bool contains(pixel_coord p) const noexcept {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const field&, const field&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using scalar_field = field<double>;

template <typename A, typename B>
bool same_size(const field<A>& a, const field<B>& b) noexcept {
  return a.width() == b.width() && a.height() == b.height();
}

template <typename A, typename B>
void require_same_size(const field<A>& a, const field<B>& b, const char* what) {
  if (!same_size(a, b))
    throw dimension_error(std::string(what) + ": size mismatch " + std::to_string(a.width()) +
                          "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                          "x" + std::to_string(b.height()));
}

}  // namespace makeup
