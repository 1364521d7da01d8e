#pragma once

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "makeup/image.hpp"

namespace makeup::io {

using byte_buffer = std::vector<std::uint8_t>;

namespace detail {

struct png_reader {
  png_image image{};
  png_reader() {
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
  }
  ~png_reader() { png_image_free(&image); }
  png_reader(const png_reader&) = delete;
  png_reader& operator=(const png_reader&) = delete;
};

inline void check_size(const png_image& image, const std::string& what) {
  if (image.width < 1 || image.height < 1 || image.width > 16384 || image.height > 16384)
    throw parse_error(what + ": unsupported image size " + std::to_string(image.width) + "x" +
                      std::to_string(image.height));
}

inline raster_image finish_rgb(png_reader& rd, const std::string& what) {
  check_size(rd.image, what);
  // Read RGBA and discard alpha rather than compositing.
  rd.image.format = PNG_FORMAT_RGBA;
  const int w = static_cast<int>(rd.image.width);
  const int h = static_cast<int>(rd.image.height);
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(rd.image));
  if (!png_image_finish_read(&rd.image, nullptr, buf.data(), 0, nullptr))
    throw parse_error(what + ": " + rd.image.message);
  raster_image out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {buf[4 * i], buf[4 * i + 1], buf[4 * i + 2]};
  return out;
}

inline field<std::uint8_t> finish_gray(png_reader& rd, const std::string& what) {
  check_size(rd.image, what);
  if (rd.image.format & PNG_FORMAT_FLAG_COLOR)
    throw parse_error(what + ": expected a single-channel image");
  rd.image.format = PNG_FORMAT_GRAY;
  const int w = static_cast<int>(rd.image.width);
  const int h = static_cast<int>(rd.image.height);
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(rd.image));
  if (!png_image_finish_read(&rd.image, nullptr, buf.data(), 0, nullptr))
    throw parse_error(what + ": " + rd.image.message);
  return field<std::uint8_t>(w, h, std::move(buf));
}

inline byte_buffer encode(const void* pixels, int width, int height, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr))
    throw io_error(std::string("png encode: ") + image.message);
  byte_buffer out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr))
    throw io_error(std::string("png encode: ") + image.message);
  out.resize(size);
  return out;
}

}  // namespace detail

inline byte_buffer read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  return byte_buffer(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, const byte_buffer& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write to " + path.string());
}

inline raster_image decode_rgb(std::span<const std::uint8_t> bytes, const std::string& what = "image") {
  detail::png_reader rd;
  if (!png_image_begin_read_from_memory(&rd.image, bytes.data(), bytes.size()))
    throw parse_error(what + ": " + rd.image.message);
  return detail::finish_rgb(rd, what);
}

inline field<std::uint8_t> decode_gray(std::span<const std::uint8_t> bytes,
                                       const std::string& what = "image") {
  detail::png_reader rd;
  if (!png_image_begin_read_from_memory(&rd.image, bytes.data(), bytes.size()))
    throw parse_error(what + ": " + rd.image.message);
  return detail::finish_gray(rd, what);
}

inline raster_image load_rgb(const std::filesystem::path& path) {
  return decode_rgb(read_file(path), path.string());
}

inline field<std::uint8_t> load_gray(const std::filesystem::path& path) {
  return decode_gray(read_file(path), path.string());
}

/// Opaque 8-bit RGB PNG. Output bytes depend only on the pixels.
inline byte_buffer encode_png(const raster_image& img) {
  static_assert(sizeof(rgb8) == 3);
  return detail::encode(img.values().data(), img.width(), img.height(), PNG_FORMAT_RGB);
}

inline byte_buffer encode_png(const field<std::uint8_t>& img) {
  return detail::encode(img.values().data(), img.width(), img.height(), PNG_FORMAT_GRAY);
}

inline void save_png(const std::filesystem::path& path, const raster_image& img) {
  write_file(path, encode_png(img));
}

inline void save_png(const std::filesystem::path& path, const field<std::uint8_t>& img) {
  write_file(path, encode_png(img));
}

}  // namespace makeup::io
