#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "makeup/align.hpp"
#include "makeup/image_io.hpp"
#include "makeup/layers.hpp"
#include "makeup/masks.hpp"
#include "makeup/preprocess.hpp"
#include "makeup/transfer.hpp"

namespace makeup {

inline constexpr const char* version = "0.1.0";

/// Every knob of one transfer, independent of where the images come from.
struct pipeline_options {
  transfer_params transfer;
  wls_params wls;
  color_balance_params whitening;
  bilateral_params smoothing;
  bool skip_preprocess = false;
  bool whitening_enabled = true;
  bool smoothing_enabled = true;
  bool airbangs = false;
  double soften_sigma = default_soften_sigma;

  void validate() const {
    transfer.validate();
    wls.validate();
    whitening.validate();
    smoothing.validate();
    if (!(soften_sigma > 0.0) || !std::isfinite(soften_sigma))
      throw range_error("soften sigma must be positive");
  }
};

struct face_files {
  std::filesystem::path image;
  std::filesystem::path landmarks;
  std::filesystem::path labels;
};

struct pipeline_config {
  face_files input;
  face_files reference;
  pipeline_options options;
  std::filesystem::path output;
  std::optional<std::filesystem::path> dump_dir;

  void validate() const {
    auto need = [](const std::filesystem::path& p, const char* what) {
      if (p.empty()) throw config_error(std::string("missing ") + what + " path");
      if (!std::filesystem::is_regular_file(p))
        throw config_error(std::string(what) + " file not found: " + p.string());
    };
    need(input.image, "input image");
    need(input.landmarks, "input landmarks");
    need(input.labels, "input labels");
    need(reference.image, "reference image");
    need(reference.landmarks, "reference landmarks");
    need(reference.labels, "reference labels");
    if (output.empty()) throw config_error("missing output path");
    options.validate();
  }
};

/// A face image with its landmarks and parse, validated against each other.
struct face_data {
  raster_image image;
  landmark_set landmarks;
  label_map labels;
};

struct stage_timing {
  std::string stage;
  double milliseconds = 0.0;
};

struct pipeline_report {
  std::vector<stage_timing> stages;  // in execution order
  int input_solver_iterations = 0;
  int reference_solver_iterations = 0;
  std::filesystem::path output;
  std::vector<std::string> warnings;

  double total_milliseconds() const {
    double t = 0.0;
    for (const auto& s : stages) t += s.milliseconds;
    return t;
  }
};

/// Intermediate images kept for inspection.
struct debug_artifacts {
  raster_image warped_reference;
  label_map warped_reference_labels;
  layer_set input_layers;
  layer_set reference_layers;
  region_map regions;
  std::optional<soft_mask> soft;
};

struct transfer_result {
  raster_image output;
  pipeline_report report;
  std::optional<debug_artifacts> debug;
};

namespace detail {

class stage_clock {
 public:
  explicit stage_clock(pipeline_report& report) : report_(report) {}

  template <typename F>
  auto run(const char* stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record(stage, start);
      } else {
        auto out = body();
        record(stage, start);
        return out;
      }
    } catch (const stage_error&) {
      throw;
    } catch (const std::exception& e) {
      throw stage_error(stage, e.what());
    }
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - start;
    report_.stages.push_back({stage, dt.count()});
  }

  pipeline_report& report_;
};

inline field<std::uint8_t> skin_mask(const label_map& labels) {
  field<std::uint8_t> m(labels.width(), labels.height(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == facial_class::skin ? 1 : 0;
  return m;
}

}  // namespace detail

/// Runs the whole transfer in memory: preprocess, align, decompose, transfer,
/// recompose and (optionally) air-bangs fusion.
inline transfer_result run_transfer(const face_data& input, const face_data& reference,
                                    const pipeline_options& options, bool keep_debug = false) {
  options.validate();
  const int w = input.image.width();
  const int h = input.image.height();
  if (!same_size(input.image, input.labels.raw()))
    throw stage_error("load", "input label map size differs from input image");
  if (!same_size(reference.image, reference.labels.raw()))
    throw stage_error("load", "reference label map size differs from reference image");

  transfer_result result;
  detail::stage_clock clock(result.report);

  // The fused air-bangs result takes its input pixels from the preprocessed image.
  raster_image prepared = input.image;
  lab_image input_lab = clock.run("preprocess", [&] {
    if (options.skip_preprocess) return rgb_to_lab(input.image);
    if (options.whitening_enabled) prepared = color_balance(prepared, options.whitening);
    lab_image lab = rgb_to_lab(prepared);
    if (options.smoothing_enabled) {
      const auto mask = detail::skin_mask(input.labels);
      lab = bilateral_filter(lab, options.smoothing, &mask);
      prepared = lab_to_rgb(lab);
    }
    return lab;
  });

  raster_image warped;
  label_map warped_labels;
  clock.run("align", [&] {
    warped = warp_image(reference.image, reference.landmarks, input.landmarks, w, h);
    warped_labels = warp_labels(reference.labels, reference.landmarks, input.landmarks, w, h);
  });

  decomposition in_dec, ref_dec;
  clock.run("decompose", [&] {
    in_dec = decompose_with_stats(input_lab, options.wls);
    ref_dec = decompose_with_stats(rgb_to_lab(warped), options.wls);
  });
  result.report.input_solver_iterations = in_dec.solver_iterations;
  result.report.reference_solver_iterations = ref_dec.solver_iterations;

  const region_map regions = classify_regions(input.labels);
  {
    std::size_t c1 = 0, covered = 0;
    for (std::size_t i = 0; i < regions.size(); ++i)
      if (regions[i] == region::c1) {
        ++c1;
        if (region_of(warped_labels[i]) == region::c1) ++covered;
      }
    if (c1 == 0)
      result.report.warnings.push_back("input label map has no skin-like region; nothing transferred");
    else if (covered < 0.9 * c1)
      result.report.warnings.push_back(
          "warped reference face covers only " + std::to_string(100 * covered / c1) +
          "% of the input face region");
  }

  const lab_image out_lab = clock.run("transfer", [&] {
    return apply_transfer(input_lab, in_dec.layers, ref_dec.layers, regions, options.transfer);
  });

  raster_image out = clock.run("recompose", [&] { return lab_to_rgb(out_lab); });

  std::optional<soft_mask> soft;
  if (options.airbangs) {
    out = clock.run("fuse", [&] {
      soft = soften(input.labels, options.soften_sigma);
      return fuse(prepared, out, *soft, retention_policy::air_bangs());
    });
  }

  result.output = std::move(out);
  if (keep_debug)
    result.debug = debug_artifacts{std::move(warped), std::move(warped_labels), std::move(in_dec.layers),
                                   std::move(ref_dec.layers), regions, std::move(soft)};
  return result;
}

/// Reads and cross-validates one face's three files.
inline face_data load_face(const face_files& files) {
  face_data f;
  f.image = io::load_rgb(files.image);
  f.landmarks = load_landmarks(files.landmarks, f.image);
  f.labels = load_label_map(files.labels, f.image.width(), f.image.height());
  return f;
}

namespace detail {

inline field<std::uint8_t> to_gray(const scalar_field& f, double offset, double scale) {
  field<std::uint8_t> g(f.width(), f.height());
  for (std::size_t i = 0; i < f.size(); ++i)
    g[i] = static_cast<std::uint8_t>(std::clamp(std::round(offset + scale * f[i]), 0.0, 255.0));
  return g;
}

inline void dump_layers(const std::filesystem::path& dir, const std::string& prefix, const layer_set& l) {
  io::save_png(dir / (prefix + "_s.png"), to_gray(l.s, 0.0, 2.55));
  // Detail is signed and small: centre on 128, 4 grey levels per L unit.
  io::save_png(dir / (prefix + "_d.png"), to_gray(l.d, 128.0, 4.0));
  io::save_png(dir / (prefix + "_a.png"), to_gray(l.a, 128.0, 1.0));
  io::save_png(dir / (prefix + "_b.png"), to_gray(l.b, 128.0, 1.0));
}

}  // namespace detail

/// Writes warped reference, layer images, region map and soft-mask weights to `dir`.
inline void write_debug_dump(const std::filesystem::path& dir, const debug_artifacts& dbg) {
  std::filesystem::create_directories(dir);
  io::save_png(dir / "warped_reference.png", dbg.warped_reference);
  io::save_png(dir / "warped_reference_labels.png", dbg.warped_reference_labels.raw());
  detail::dump_layers(dir, "input", dbg.input_layers);
  detail::dump_layers(dir, "reference", dbg.reference_layers);
  field<std::uint8_t> reg(dbg.regions.width(), dbg.regions.height());
  for (std::size_t i = 0; i < reg.size(); ++i)
    reg[i] = dbg.regions[i] == region::c1 ? 255 : dbg.regions[i] == region::c2 ? 128 : 0;
  io::save_png(dir / "regions.png", reg);
  if (dbg.soft) {
    const auto policy = retention_policy::air_bangs();
    scalar_field keep(dbg.regions.width(), dbg.regions.height(), 0.0);
    for (int c = 0; c < class_count; ++c)
      if (policy.keeps_input(static_cast<facial_class>(c)))
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] += dbg.soft->channel(c)[i];
    io::save_png(dir / "input_retention_weight.png", detail::to_gray(keep, 0.0, 255.0));
  }
}

/// File-to-file pipeline. No output file is left behind on failure.
inline pipeline_report run_pipeline(const pipeline_config& config) {
  try {
    config.validate();
  } catch (const error& e) {
    throw stage_error("config", e.what());
  }
  face_data input, reference;
  try {
    input = load_face(config.input);
  } catch (const error& e) {
    throw stage_error("load-input", e.what());
  }
  try {
    reference = load_face(config.reference);
  } catch (const error& e) {
    throw stage_error("load-reference", e.what());
  }

  transfer_result result = run_transfer(input, reference, config.options, config.dump_dir.has_value());

  const auto start = std::chrono::steady_clock::now();
  try {
    const auto bytes = io::encode_png(result.output);
    // Write beside the target and rename, so a failed write leaves nothing behind.
    auto tmp = config.output;
    tmp += ".partial";
    try {
      io::write_file(tmp, bytes);
      std::filesystem::rename(tmp, config.output);
    } catch (...) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
    if (config.dump_dir) write_debug_dump(*config.dump_dir, *result.debug);
  } catch (const std::exception& e) {
    throw stage_error("write", e.what());
  }
  const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - start;
  result.report.stages.push_back({"write", dt.count()});
  result.report.output = config.output;
  return result.report;
}

}  // namespace makeup
