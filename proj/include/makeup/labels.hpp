#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "makeup/field.hpp"

namespace makeup {

/// Facial component classes; the value is the pixel value in label-map files.
enum class facial_class : std::uint8_t {
  background = 0,
  hair = 1,
  left_eyebrow = 2,
  right_eyebrow = 3,
  left_eye = 4,
  right_eye = 5,
  nose = 6,
  upper_lip = 7,
  lower_lip = 8,
  mouth_cavity = 9,
  skin = 10,
};

inline constexpr int class_count = 11;

inline constexpr std::array<std::string_view, class_count> class_names{
    "background", "hair",      "left_eyebrow", "right_eyebrow", "left_eye", "right_eye",
    "nose",       "upper_lip", "lower_lip",    "mouth_cavity",  "skin",
};

/// Per-pixel facial class indices, every value guaranteed < class_count.
class label_map {
 public:
  label_map() = default;
  label_map(int width, int height, facial_class fill = facial_class::background)
      : labels_(width, height, static_cast<std::uint8_t>(fill)) {}
  explicit label_map(field<std::uint8_t> raw) : labels_(std::move(raw)) {
    for (auto v : labels_)
      if (v >= class_count) throw label_value_error(v);
  }

  int width() const noexcept { return labels_.width(); }
  int height() const noexcept { return labels_.height(); }
  std::size_t size() const noexcept { return labels_.size(); }

  facial_class operator()(int x, int y) const { return static_cast<facial_class>(labels_(x, y)); }
  facial_class operator[](std::size_t i) const { return static_cast<facial_class>(labels_[i]); }
  void set(int x, int y, facial_class c) { labels_(x, y) = static_cast<std::uint8_t>(c); }

  const field<std::uint8_t>& raw() const noexcept { return labels_; }

  friend bool operator==(const label_map&, const label_map&) = default;

 private:
  field<std::uint8_t> labels_;
};

}  // namespace makeup
