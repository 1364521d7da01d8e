#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "makeup/layers.hpp"
#include "makeup/masks.hpp"

namespace makeup {

enum class structure_mode {
  illumination,  // darken toward the reference where the input is brighter
  literal,       // take the reference structure outright
  keep_input,
};

inline std::string_view to_string(structure_mode m) {
  switch (m) {
    case structure_mode::illumination: return "illumination";
    case structure_mode::literal: return "literal";
    case structure_mode::keep_input: return "keep-input";
  }
  return "illumination";
}

inline structure_mode parse_structure_mode(std::string_view s) {
  if (s == "illumination") return structure_mode::illumination;
  if (s == "literal") return structure_mode::literal;
  if (s == "keep-input" || s == "keep_input") return structure_mode::keep_input;
  throw config_error("unknown structure mode '" + std::string(s) + "'");
}

struct transfer_params {
  double alpha = 0.95;  // color blend weight toward the reference
  double beta = 30.0;   // illumination strength, on the L in [0, 100] scale
  bool illumination_enabled = true;
  structure_mode structure = structure_mode::illumination;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw range_error("alpha must lie in [0, 1]");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw range_error("beta must be positive");
  }

  /// Structure rule actually applied: illumination disabled falls back to the input structure.
  structure_mode effective_structure() const {
    if (structure == structure_mode::illumination && !illumination_enabled)
      return structure_mode::keep_input;
    return structure;
  }
};

/// Reference detail inside C1, input detail elsewhere.
inline scalar_field transfer_detail(const layer_set& input, const layer_set& reference,
                                    const region_map& regions) {
  require_same_size(input.d, reference.d, "transfer_detail");
  require_same_size(input.d, regions, "transfer_detail");
  scalar_field out = input.d;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (regions[i] == region::c1) out[i] = reference.d[i];
  return out;
}

struct color_planes {
  scalar_field a;
  scalar_field b;
};

/// (1 - alpha) * input + alpha * reference inside C1; input elsewhere.
inline color_planes transfer_color(const color_planes& input, const color_planes& reference,
                                   const region_map& regions, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw range_error("alpha must lie in [0, 1]");
  require_same_size(input.a, input.b, "transfer_color");
  require_same_size(input.a, reference.a, "transfer_color");
  require_same_size(input.a, reference.b, "transfer_color");
  require_same_size(input.a, regions, "transfer_color");
  color_planes out = input;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i] != region::c1) continue;
    out.a[i] = (1.0 - alpha) * input.a[i] + alpha * reference.a[i];
    out.b[i] = (1.0 - alpha) * input.b[i] + alpha * reference.b[i];
  }
  return out;
}

/// Single-pixel illumination rule; `input` and `reference` are structure lightness values.
inline double illuminate(double input, double reference, double beta) {
  if (!(input > reference)) return input;
  const double gap = input - reference;
  return std::clamp(input - gap * gap / beta, reference, input);
}

/// Darkens the input structure toward a darker reference inside C1.
inline scalar_field illumination_transfer(const scalar_field& input_s, const scalar_field& reference_s,
                                          const region_map& regions, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw range_error("beta must be positive");
  require_same_size(input_s, reference_s, "illumination_transfer");
  require_same_size(input_s, regions, "illumination_transfer");
  scalar_field out = input_s;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (regions[i] == region::c1) out[i] = illuminate(input_s[i], reference_s[i], beta);
  return out;
}

inline scalar_field transfer_structure_literal(const scalar_field& input_s,
                                               const scalar_field& reference_s,
                                               const region_map& regions) {
  require_same_size(input_s, reference_s, "transfer_structure_literal");
  require_same_size(input_s, regions, "transfer_structure_literal");
  scalar_field out = input_s;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (regions[i] == region::c1) out[i] = reference_s[i];
  return out;
}

/// Combines the transferred layers into the output Lab image.
///
/// Pixels outside C1 carry the input L, a, b unchanged; C1 pixels get
/// s + d clamped to [0, 100].
inline lab_image apply_transfer(const lab_image& input_lab, const layer_set& input,
                                const layer_set& reference, const region_map& regions,
                                const transfer_params& params) {
  params.validate();
  require_same_size(input.s, reference.s, "apply_transfer");
  require_same_size(input.s, regions, "apply_transfer");
  require_same_size(input.s, input_lab.L(), "apply_transfer");

  scalar_field s;
  switch (params.effective_structure()) {
    case structure_mode::illumination:
      s = illumination_transfer(input.s, reference.s, regions, params.beta);
      break;
    case structure_mode::literal:
      s = transfer_structure_literal(input.s, reference.s, regions);
      break;
    case structure_mode::keep_input:
      s = input.s;
      break;
  }
  const scalar_field d = transfer_detail(input, reference, regions);
  color_planes ab = transfer_color({input.a, input.b}, {reference.a, reference.b}, regions, params.alpha);

  lab_image out = input_lab;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i] != region::c1) continue;
    out.L()[i] = std::clamp(s[i] + d[i], 0.0, 100.0);
    out.a()[i] = ab.a[i];
    out.b()[i] = ab.b[i];
  }
  return out;
}

/// Same as above with the input Lab image rebuilt from its layers.
inline lab_image apply_transfer(const layer_set& input, const layer_set& reference,
                                const region_map& regions, const transfer_params& params) {
  return apply_transfer(recompose(input), input, reference, regions, params);
}

}  // namespace makeup
