#pragma once

#include <filesystem>
#include <string>

#include "makeup/makeup.hpp"

namespace fixture {

inline std::filesystem::path data_dir() { return MAKEUP_TEST_DATA_DIR; }

inline makeup::face_files face(const std::string& name) {
  const auto d = data_dir();
  return {d / (name + ".png"), d / (name + ".landmarks"), d / (name + ".labels.png")};
}

/// The bundled subject/reference pair at default parameters.
inline makeup::pipeline_config pair_config(const std::filesystem::path& out) {
  makeup::pipeline_config cfg;
  cfg.input = face("subject");
  cfg.reference = face("reference");
  cfg.output = out;
  return cfg;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("makeup_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

inline int max_channel_diff(const makeup::raster_image& a, const makeup::raster_image& b) {
  int worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max({worst, std::abs(a[i].r - b[i].r), std::abs(a[i].g - b[i].g), std::abs(a[i].b - b[i].b)});
  return worst;
}

}  // namespace fixture
