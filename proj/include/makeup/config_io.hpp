#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "makeup/pipeline.hpp"

namespace makeup {

namespace detail {

inline void read_offsets(const nlohmann::json& j, channel_offsets& o) {
  if (!j.is_array() || j.size() != 3) throw config_error("color offsets must be [red, green, blue]");
  o = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline void read_face(const nlohmann::json& j, const std::filesystem::path& base, face_files& f) {
  auto path = [&](const char* key, std::filesystem::path& out) {
    if (j.contains(key)) {
      std::filesystem::path p = j.at(key).get<std::string>();
      out = p.is_absolute() ? p : base / p;
    }
  };
  path("image", f.image);
  path("landmarks", f.landmarks);
  path("labels", f.labels);
}

}  // namespace detail

/// Applies a JSON config document on top of `cfg`.
///
/// Relative paths resolve against `base`. Keys mirror the CLI flags:
/// input/reference {image, landmarks, labels}, transfer {alpha, beta,
/// illumination, structure_mode}, wls {lambda, alpha, epsilon, cg_tol,
/// cg_max_iters}, whitening {enabled, shadows, midtones, highlights},
/// smoothing {enabled, sigma_spatial, sigma_range, radius}, skip_preprocess,
/// airbangs, soften_sigma, out, dump_layers.
inline void apply_config_json(const nlohmann::json& j, const std::filesystem::path& base,
                              pipeline_config& cfg) {
  try {
    if (!j.is_object()) throw config_error("config must be a JSON object");
    auto& o = cfg.options;
    if (j.contains("input")) detail::read_face(j["input"], base, cfg.input);
    if (j.contains("reference")) detail::read_face(j["reference"], base, cfg.reference);
    if (j.contains("transfer")) {
      const auto& t = j["transfer"];
      if (t.contains("alpha")) o.transfer.alpha = t["alpha"].get<double>();
      if (t.contains("beta")) o.transfer.beta = t["beta"].get<double>();
      if (t.contains("illumination")) o.transfer.illumination_enabled = t["illumination"].get<bool>();
      if (t.contains("structure_mode"))
        o.transfer.structure = parse_structure_mode(t["structure_mode"].get<std::string>());
    }
    if (j.contains("wls")) {
      const auto& w = j["wls"];
      if (w.contains("lambda")) o.wls.lambda = w["lambda"].get<double>();
      if (w.contains("alpha")) o.wls.alpha = w["alpha"].get<double>();
      if (w.contains("epsilon")) o.wls.epsilon = w["epsilon"].get<double>();
      if (w.contains("cg_tol")) o.wls.cg_tolerance = w["cg_tol"].get<double>();
      if (w.contains("cg_max_iters")) o.wls.cg_max_iters = w["cg_max_iters"].get<int>();
    }
    if (j.contains("whitening")) {
      const auto& w = j["whitening"];
      if (w.contains("enabled")) o.whitening_enabled = w["enabled"].get<bool>();
      if (w.contains("shadows")) detail::read_offsets(w["shadows"], o.whitening.shadows);
      if (w.contains("midtones")) detail::read_offsets(w["midtones"], o.whitening.midtones);
      if (w.contains("highlights")) detail::read_offsets(w["highlights"], o.whitening.highlights);
    }
    if (j.contains("smoothing")) {
      const auto& s = j["smoothing"];
      if (s.contains("enabled")) o.smoothing_enabled = s["enabled"].get<bool>();
      if (s.contains("sigma_spatial")) o.smoothing.sigma_spatial = s["sigma_spatial"].get<double>();
      if (s.contains("sigma_range")) o.smoothing.sigma_range = s["sigma_range"].get<double>();
      if (s.contains("radius")) o.smoothing.kernel_radius = s["radius"].get<int>();
    }
    if (j.contains("skip_preprocess")) o.skip_preprocess = j["skip_preprocess"].get<bool>();
    if (j.contains("airbangs")) o.airbangs = j["airbangs"].get<bool>();
    if (j.contains("soften_sigma")) o.soften_sigma = j["soften_sigma"].get<double>();
    if (j.contains("out")) {
      std::filesystem::path p = j["out"].get<std::string>();
      cfg.output = p.is_absolute() ? p : base / p;
    }
    if (j.contains("dump_layers")) {
      std::filesystem::path p = j["dump_layers"].get<std::string>();
      cfg.dump_dir = p.is_absolute() ? p : base / p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
}

inline void load_config_file(const std::filesystem::path& path, pipeline_config& cfg) {
  const auto bytes = io::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw config_error(path.string() + ": " + e.what());
  }
  apply_config_json(j, path.parent_path(), cfg);
}

inline nlohmann::json report_to_json(const pipeline_report& r) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) stages.push_back({{"stage", s.stage}, {"ms", s.milliseconds}});
  return {{"stages", stages},
          {"total_ms", r.total_milliseconds()},
          {"solver_iterations", {{"input", r.input_solver_iterations}, {"reference", r.reference_solver_iterations}}},
          {"output", r.output.string()},
          {"warnings", r.warnings}};
}

}  // namespace makeup
