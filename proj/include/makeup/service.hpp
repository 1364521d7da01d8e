#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "makeup/pipeline.hpp"

// HTTP front end:
//   GET  /health                       -> {"status": "ok", "version": ...}
//   GET  /references                   -> gallery manifest
//   GET  /references/<id>/thumbnail    -> PNG thumbnail
//   POST /transfer (multipart)         -> PNG bytes, Server-Timing and X-Output-Checksum headers

namespace makeup::service {

inline constexpr int max_side = 2048;

/// FNV-1a 64-bit digest, hex encoded.
inline std::string checksum_hex(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct gallery_entry {
  std::string id;
  face_files files;
  std::optional<std::filesystem::path> thumbnail;
};

/// Reads `<asset_dir>/references.json`:
///   {"references": [{"id", "image", "landmarks", "labels", "thumbnail"?}]}
/// A missing manifest means an empty gallery.
inline std::vector<gallery_entry> load_gallery(const std::filesystem::path& asset_dir) {
  std::vector<gallery_entry> out;
  const auto manifest = asset_dir / "references.json";
  if (!std::filesystem::exists(manifest)) return out;
  const auto bytes = io::read_file(manifest);
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    for (const auto& r : j.at("references")) {
      gallery_entry e;
      e.id = r.at("id").get<std::string>();
      auto rel = [&](const char* key) -> std::filesystem::path {
        return r.contains(key) ? asset_dir / r[key].get<std::string>() : std::filesystem::path{};
      };
      e.files = {rel("image"), rel("landmarks"), rel("labels")};
      if (r.contains("thumbnail")) e.thumbnail = rel("thumbnail");
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw config_error(manifest.string() + ": " + ex.what());
  }
  return out;
}

/// Nearest-neighbour downscale so the longer side is at most `side` pixels.
inline raster_image thumbnail_of(const raster_image& img, int side = 128) {
  const double s = std::min(1.0, double(side) / std::max(img.width(), img.height()));
  const int w = std::max(1, static_cast<int>(img.width() * s));
  const int h = std::max(1, static_cast<int>(img.height() * s));
  raster_image out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out(x, y) = img.clamped(static_cast<int>((x + 0.5) / s), static_cast<int>((y + 0.5) / s));
  return out;
}

/// A rejected request: HTTP status plus a machine-readable reason code.
struct request_error : error {
  request_error(int status, std::string reason, const std::string& what, std::string field = {})
      : error(what), status(status), reason(std::move(reason)), field(std::move(field)) {}
  int status;
  std::string reason;
  std::string field;
};

namespace detail {

inline std::optional<std::string> text_field(const httplib::Request& req, const std::string& key) {
  if (req.has_file(key)) return req.get_file_value(key).content;
  if (req.has_param(key)) return req.get_param_value(key);
  return std::nullopt;
}

inline std::optional<double> number_field(const httplib::Request& req, const std::string& key) {
  const auto s = text_field(req, key);
  if (!s) return std::nullopt;
  double v = 0.0;
  const auto* first = s->data();
  const auto* last = s->data() + s->size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw request_error(400, "invalid_parameter", key + " is not a number", key);
  return v;
}

inline std::optional<bool> bool_field(const httplib::Request& req, const std::string& key) {
  const auto s = text_field(req, key);
  if (!s) return std::nullopt;
  if (*s == "1" || *s == "true" || *s == "on") return true;
  if (*s == "0" || *s == "false" || *s == "off") return false;
  throw request_error(400, "invalid_parameter", key + " must be a boolean", key);
}

inline std::string required_file(const httplib::Request& req, const std::string& key) {
  if (!req.has_file(key)) throw request_error(400, "missing_field", "missing upload '" + key + "'", key);
  return req.get_file_value(key).content;
}

inline std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline face_data decode_face(const std::string& image, const std::string& landmarks,
                             const std::string& labels, const std::string& who) {
  face_data f;
  try {
    f.image = io::decode_rgb(as_bytes(image), who + " image");
  } catch (const error& e) {
    throw request_error(400, "malformed_upload", e.what(), who);
  }
  if (f.image.width() > max_side || f.image.height() > max_side)
    throw request_error(413, "image_too_large",
                        who + " image exceeds " + std::to_string(max_side) + " pixels per side", who);
  try {
    f.landmarks = parse_landmarks(landmarks, f.image.width(), f.image.height());
  } catch (const error& e) {
    throw request_error(400, "invalid_landmarks", e.what(), who + "_landmarks");
  }
  try {
    f.labels = decode_label_map(as_bytes(labels), f.image.width(), f.image.height());
  } catch (const error& e) {
    throw request_error(400, "invalid_labels", e.what(), who + "_labels");
  }
  return f;
}

/// Reads the `<who>`, `<who>_landmarks`, `<who>_labels` uploads in that order.
inline face_data decode_upload(const httplib::Request& req, const std::string& who) {
  const auto image = required_file(req, who);
  const auto landmarks = required_file(req, who + "_landmarks");
  const auto labels = required_file(req, who + "_labels");
  return decode_face(image, landmarks, labels, who);
}

inline std::string server_timing(const pipeline_report& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    if (i) os << ", ";
    os << r.stages[i].stage << ";dur=" << r.stages[i].milliseconds;
  }
  return os.str();
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace detail

/// Parameters of a transfer request, starting from library defaults.
inline pipeline_options parse_options(const httplib::Request& req) {
  pipeline_options o;
  if (auto v = detail::number_field(req, "alpha")) o.transfer.alpha = *v;
  if (auto v = detail::number_field(req, "beta")) o.transfer.beta = *v;
  if (auto v = detail::bool_field(req, "illumination")) o.transfer.illumination_enabled = *v;
  if (auto s = detail::text_field(req, "structure_mode")) {
    try {
      o.transfer.structure = parse_structure_mode(*s);
    } catch (const error& e) {
      throw request_error(400, "invalid_parameter", e.what(), "structure_mode");
    }
  }
  if (auto v = detail::bool_field(req, "airbangs")) o.airbangs = *v;
  if (auto v = detail::bool_field(req, "skip_preprocess")) o.skip_preprocess = *v;
  if (auto v = detail::number_field(req, "soften_sigma")) o.soften_sigma = *v;
  try {
    o.validate();
  } catch (const range_error& e) {
    throw request_error(400, "out_of_range", e.what());
  }
  return o;
}

class studio_service {
 public:
  explicit studio_service(std::filesystem::path asset_dir)
      : asset_dir_(std::move(asset_dir)), gallery_(load_gallery(asset_dir_)) {}

  const std::vector<gallery_entry>& gallery() const noexcept { return gallery_; }

  void mount(httplib::Server& srv) const {
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      detail::send_json(res, 200, {{"status", "ok"}, {"version", version}});
    });
    srv.Get("/references", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& e : gallery_)
        list.push_back({{"id", e.id},
                        {"thumbnail", "/references/" + e.id + "/thumbnail"},
                        {"has_landmarks", std::filesystem::is_regular_file(e.files.landmarks)},
                        {"has_labels", std::filesystem::is_regular_file(e.files.labels)}});
      detail::send_json(res, 200, {{"references", list}});
    });
    srv.Get(R"(/references/([^/]+)/thumbnail)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* e = find(req.matches[1]);
      if (!e) return detail::send_json(res, 404, {{"error", "unknown reference"}, {"reason", "unknown_reference"}});
      try {
        const auto bytes = e->thumbnail ? io::read_file(*e->thumbnail)
                                        : io::encode_png(thumbnail_of(io::load_rgb(e->files.image)));
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
      } catch (const std::exception& ex) {
        detail::send_json(res, 500, {{"error", ex.what()}, {"stage", "gallery"}});
      }
    });
    srv.Post("/transfer", [this](const httplib::Request& req, httplib::Response& res) {
      handle_transfer(req, res);
    });
  }

  void handle_transfer(const httplib::Request& req, httplib::Response& res) const {
    face_data input, reference;
    pipeline_options options;
    try {
      input = detail::decode_upload(req, "input");
      options = parse_options(req);
      if (auto id = detail::text_field(req, "reference_id")) {
        const auto* e = find(*id);
        if (!e) throw request_error(404, "unknown_reference", "no reference with id '" + *id + "'", "reference_id");
        try {
          reference = load_face(e->files);
        } catch (const error& ex) {
          return detail::send_json(res, 500, {{"error", ex.what()}, {"stage", "load-reference"}});
        }
      } else {
        reference = detail::decode_upload(req, "reference");
      }
    } catch (const request_error& e) {
      nlohmann::json body{{"error", e.what()}, {"reason", e.reason}};
      if (!e.field.empty()) body["field"] = e.field;
      return detail::send_json(res, e.status, body);
    }

    try {
      const auto result = run_transfer(input, reference, options);
      const auto png = io::encode_png(result.output);
      res.set_header("Server-Timing", detail::server_timing(result.report));
      res.set_header("X-Total-Ms", std::to_string(result.report.total_milliseconds()));
      res.set_header("X-Output-Checksum", checksum_hex(png));
      res.set_header("X-Solver-Iterations", std::to_string(result.report.input_solver_iterations) + "," +
                                                std::to_string(result.report.reference_solver_iterations));
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    } catch (const stage_error& e) {
      detail::send_json(res, 500, {{"error", e.what()}, {"stage", e.stage()}});
    } catch (const std::exception& e) {
      detail::send_json(res, 500, {{"error", e.what()}, {"stage", "unknown"}});
    }
  }

 private:
  const gallery_entry* find(const std::string& id) const {
    for (const auto& e : gallery_)
      if (e.id == id) return &e;
    return nullptr;
  }

  std::filesystem::path asset_dir_;
  std::vector<gallery_entry> gallery_;
};

/// Binds `host:port` and serves until the process is stopped.
inline void serve(const std::string& host, int port, const std::filesystem::path& asset_dir) {
  studio_service svc(asset_dir);
  httplib::Server srv;
  srv.set_payload_max_length(64u << 20);
  svc.mount(srv);
  if (!srv.listen(host, port))
    throw io_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace makeup::service
