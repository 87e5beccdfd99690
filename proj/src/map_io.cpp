#include "stereonormal/map_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string_view>

namespace stereonormal {

namespace {

constexpr std::size_t kMaxPixels = std::size_t{1} << 28;

// ---------------------------------------------------------------------------
// Little-endian float32 helpers

void put_f32(Bytes& out, float f) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float get_f32(const std::uint8_t* p, bool little_endian) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    const std::uint32_t b = little_endian ? p[i] : p[3 - i];
    bits |= b << (8 * i);
  }
  return std::bit_cast<float>(bits);
}

void append(Bytes& out, std::string_view s) { out.insert(out.end(), s.begin(), s.end()); }

bool is_space(std::uint8_t c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

/// Next whitespace-delimited token starting at `pos`; leaves `pos` on the
/// delimiter that ended it.
std::string_view next_token(ByteView bytes, std::size_t& pos, const char* what) {
  while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
  const std::size_t start = pos;
  while (pos < bytes.size() && !is_space(bytes[pos])) ++pos;
  if (start == pos || pos >= bytes.size()) {
    throw FormatError(std::string("truncated header: missing ") + what, start);
  }
  return {reinterpret_cast<const char*>(bytes.data()) + start, pos - start};
}

/// Parses a token that views into `bytes`; errors report the token's offset.
template <typename T>
T parse_token(ByteView bytes, std::string_view tok, const char* what) {
  T x{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    const auto offset = std::size_t(tok.data() - reinterpret_cast<const char*>(bytes.data()));
    throw FormatError(std::string("malformed ") + what, offset);
  }
  return x;
}

std::string fmt_float(float f) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, f);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// libpng glue. Errors longjmp back to the frame that called setjmp.

struct PngIo {
  ByteView in;
  std::size_t pos = 0;
  Bytes* out = nullptr;
  char message[200] = {};
};

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* io = static_cast<PngIo*>(png_get_error_ptr(png));
  std::snprintf(io->message, sizeof io->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

void png_read_cb(png_structp png, png_bytep data, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  if (io->in.size() - io->pos < length) png_error(png, "truncated PNG stream");
  std::memcpy(data, io->in.data() + io->pos, length);
  io->pos += length;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  io->out->insert(io->out->end(), data, data + length);
}

void png_flush_cb(png_structp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::size_t row_bytes = 0;
  Bytes data;
};

/// Decodes without transformations; rows are stored as in the file.
DecodedPng decode_png(ByteView bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("not a PNG file", 0);
  }
  PngIo io;
  io.in = bytes;
  DecodedPng img;
  std::vector<png_bytep> rows;

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &io, png_error_cb, png_warning_cb);
  if (!png) throw std::bad_alloc();
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::bad_alloc();
  }
  volatile bool too_large = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(too_large ? "PNG image too large" : std::string("PNG decode failed: ") + io.message,
                      io.pos);
  }
  png_set_read_fn(png, &io, png_read_cb);
  png_read_info(png, info);
  img.width = int(png_get_image_width(png, info));
  img.height = int(png_get_image_height(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  img.color_type = png_get_color_type(png, info);
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);
  img.row_bytes = png_get_rowbytes(png, info);
  if (std::size_t(img.width) * std::size_t(img.height) > kMaxPixels) {
    too_large = true;
    png_longjmp(png, 1);
  }
  img.data.resize(img.row_bytes * std::size_t(img.height));
  rows.resize(std::size_t(img.height));
  for (int y = 0; y < img.height; ++y) rows[std::size_t(y)] = img.data.data() + std::size_t(y) * img.row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

Bytes encode_png(int width, int height, int bit_depth, int color_type, const Bytes& raw,
                 std::size_t row_bytes) {
  Bytes out;
  PngIo io;
  io.out = &out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    rows[std::size_t(y)] = const_cast<png_bytep>(raw.data() + std::size_t(y) * row_bytes);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &io, png_error_cb, png_warning_cb);
  if (!png) throw std::bad_alloc();
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::bad_alloc();
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(std::string("PNG encode failed: ") + io.message);
  }
  png_set_write_fn(png, &io, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void require_nonempty(int width, int height) {
  if (width <= 0 || height <= 0) throw ArgumentError("cannot encode an empty image");
}

}  // namespace

// ---------------------------------------------------------------------------
// PFM

PfmHeader read_pfm_header(ByteView bytes) {
  PfmHeader h;
  std::size_t pos = 0;
  if (bytes.size() < 3 || bytes[0] != 'P' || (bytes[1] != 'f' && bytes[1] != 'F') || !is_space(bytes[2])) {
    throw FormatError("bad PFM magic (expected 'Pf' or 'PF')", 0);
  }
  h.channels = bytes[1] == 'f' ? 1 : 3;
  pos = 2;
  auto tok = next_token(bytes, pos, "width");
  h.width = parse_token<int>(bytes, tok, "width");
  tok = next_token(bytes, pos, "height");
  h.height = parse_token<int>(bytes, tok, "height");
  if (h.width <= 0 || h.height <= 0) throw FormatError("PFM dimensions must be positive", 3);
  tok = next_token(bytes, pos, "scale");
  h.scale = parse_token<double>(bytes, tok, "scale");
  if (h.scale == 0.0 || !std::isfinite(h.scale)) {
    throw FormatError("PFM scale must be non-zero", std::size_t(tok.data() - reinterpret_cast<const char*>(bytes.data())));
  }
  // Exactly one whitespace byte separates the header from the payload.
  h.payload_offset = pos + 1;
  if (std::size_t(h.width) * std::size_t(h.height) > kMaxPixels) {
    throw FormatError("PFM image too large", h.payload_offset);
  }
  const std::size_t need = std::size_t(h.width) * std::size_t(h.height) * std::size_t(h.channels) * 4;
  if (bytes.size() < h.payload_offset + need) {
    throw FormatError("truncated PFM payload", bytes.size());
  }
  return h;
}

ScalarField read_pfm(ByteView bytes) {
  const PfmHeader h = read_pfm_header(bytes);
  if (h.channels != 1) throw FormatError("expected a single-channel 'Pf' map", 0);
  const bool le = h.scale < 0.0;
  ScalarField field(h.width, h.height);
  const std::uint8_t* p = bytes.data() + h.payload_offset;
  for (int row = 0; row < h.height; ++row) {
    const int v = h.height - 1 - row;
    for (int u = 0; u < h.width; ++u, p += 4) {
      const float f = get_f32(p, le);
      if (std::isfinite(f)) field.set(u, v, f);
    }
  }
  return field;
}

Bytes write_pfm(const ScalarField& field) {
  Bytes out;
  append(out, "Pf\n" + std::to_string(field.width()) + " " + std::to_string(field.height()) + "\n-1.0\n");
  out.reserve(out.size() + field.size() * 4);
  for (int v = field.height() - 1; v >= 0; --v)
    for (int u = 0; u < field.width(); ++u)
      put_f32(out, field.valid(u, v) ? static_cast<float>(field(u, v))
                                     : std::numeric_limits<float>::infinity());
  return out;
}

NormalField read_normal_pfm(ByteView bytes) {
  const PfmHeader h = read_pfm_header(bytes);
  if (h.channels != 3) throw FormatError("expected a three-channel 'PF' map", 0);
  const bool le = h.scale < 0.0;
  NormalField field(h.width, h.height);
  const std::uint8_t* p = bytes.data() + h.payload_offset;
  for (int row = 0; row < h.height; ++row) {
    const int v = h.height - 1 - row;
    for (int u = 0; u < h.width; ++u, p += 12) {
      const Vec3 n{get_f32(p, le), get_f32(p + 4, le), get_f32(p + 8, le)};
      if (is_finite(n)) field.set(u, v, n);
    }
  }
  return field;
}

Bytes write_normal_pfm(const NormalField& normals) {
  Bytes out;
  append(out, "PF\n" + std::to_string(normals.width()) + " " + std::to_string(normals.height()) + "\n-1.0\n");
  out.reserve(out.size() + normals.size() * 12);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  for (int v = normals.height() - 1; v >= 0; --v)
    for (int u = 0; u < normals.width(); ++u) {
      const bool ok = normals.valid(u, v);
      const Vec3& n = normals(u, v);
      put_f32(out, ok ? float(n.x) : nan);
      put_f32(out, ok ? float(n.y) : nan);
      put_f32(out, ok ? float(n.z) : nan);
    }
  return out;
}

// ---------------------------------------------------------------------------
// PNG

ScalarField read_disparity_png16(ByteView bytes, double scale, std::uint16_t invalid_value) {
  if (!(scale > 0.0)) throw ArgumentError("PNG disparity scale must be positive");
  const DecodedPng img = decode_png(bytes);
  if (img.color_type != PNG_COLOR_TYPE_GRAY || img.bit_depth != 16) {
    throw FormatError("expected a 16-bit single-channel PNG (got bit depth " +
                          std::to_string(img.bit_depth) + ", color type " +
                          std::to_string(img.color_type) + ")",
                      24);
  }
  ScalarField field(img.width, img.height);
  for (int v = 0; v < img.height; ++v) {
    const std::uint8_t* row = img.data.data() + std::size_t(v) * img.row_bytes;
    for (int u = 0; u < img.width; ++u) {
      const std::uint16_t raw = std::uint16_t(row[2 * u] << 8 | row[2 * u + 1]);
      if (raw == invalid_value) continue;
      field.set(u, v, (double(raw) - 1.0) / scale);
    }
  }
  return field;
}

Bytes write_disparity_png16(const ScalarField& disparity, double scale, std::uint16_t invalid_value) {
  if (!(scale > 0.0)) throw ArgumentError("PNG disparity scale must be positive");
  require_nonempty(disparity.width(), disparity.height());
  const std::size_t row_bytes = std::size_t(disparity.width()) * 2;
  Bytes raw(row_bytes * std::size_t(disparity.height()));
  for (int v = 0; v < disparity.height(); ++v)
    for (int u = 0; u < disparity.width(); ++u) {
      std::uint16_t q = invalid_value;
      if (disparity.valid(u, v) && std::isfinite(disparity(u, v))) {
        q = std::uint16_t(std::clamp(std::floor(disparity(u, v) * scale + 0.5) + 1.0, 1.0, 65535.0));
      }
      std::uint8_t* p = raw.data() + std::size_t(v) * row_bytes + 2 * std::size_t(u);
      p[0] = std::uint8_t(q >> 8);
      p[1] = std::uint8_t(q & 0xff);
    }
  return encode_png(disparity.width(), disparity.height(), 16, PNG_COLOR_TYPE_GRAY, raw, row_bytes);
}

Bytes write_normal_png(const NormalField& normals) {
  require_nonempty(normals.width(), normals.height());
  const std::size_t row_bytes = std::size_t(normals.width()) * 3;
  Bytes raw(row_bytes * std::size_t(normals.height()), 255);
  auto channel = [](double c) {
    return std::uint8_t(std::clamp(std::floor(255.0 * (c + 1.0) / 2.0 + 0.5), 0.0, 255.0));
  };
  for (int v = 0; v < normals.height(); ++v)
    for (int u = 0; u < normals.width(); ++u) {
      if (!normals.valid(u, v)) continue;
      const Vec3& n = normals(u, v);
      std::uint8_t* p = raw.data() + std::size_t(v) * row_bytes + 3 * std::size_t(u);
      p[0] = channel(n.x);
      p[1] = channel(n.y);
      p[2] = channel(n.z);
    }
  return encode_png(normals.width(), normals.height(), 8, PNG_COLOR_TYPE_RGB, raw, row_bytes);
}

Bytes write_mask_png(std::span<const std::uint8_t> mask, int width, int height) {
  require_nonempty(width, height);
  if (mask.size() != std::size_t(width) * std::size_t(height)) throw ArgumentError("mask size mismatch");
  Bytes raw(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) raw[i] = mask[i] ? 255 : 0;
  return encode_png(width, height, 8, PNG_COLOR_TYPE_GRAY, raw, std::size_t(width));
}

Image8 read_png8(ByteView bytes) {
  const DecodedPng img = decode_png(bytes);
  if (img.bit_depth != 8 || (img.color_type != PNG_COLOR_TYPE_GRAY && img.color_type != PNG_COLOR_TYPE_RGB)) {
    throw FormatError("expected an 8-bit gray or RGB PNG", 24);
  }
  Image8 out;
  out.width = img.width;
  out.height = img.height;
  out.channels = img.color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  out.pixels = img.data;
  return out;
}

// ---------------------------------------------------------------------------
// PLY

std::vector<OrientedPoint> oriented_cloud(const ScalarField& disparity, const NormalField& normals,
                                          const StereoRig& rig) {
  if (!disparity.same_shape(normals)) throw ArgumentError("disparity and normal shapes differ");
  std::vector<OrientedPoint> cloud;
  for (int v = 0; v < normals.height(); ++v)
    for (int u = 0; u < normals.width(); ++u) {
      if (!normals.valid(u, v) || !disparity.valid(u, v)) continue;
      if (auto X = triangulate(u, v, disparity(u, v), rig)) cloud.push_back({*X, normals(u, v)});
    }
  return cloud;
}

Bytes write_ply_oriented(std::span<const Vec3> points, std::span<const Vec3> normals, bool binary) {
  if (points.size() != normals.size()) throw ArgumentError("point and normal counts differ");
  Bytes out;
  append(out, "ply\nformat ");
  append(out, binary ? "binary_little_endian" : "ascii");
  append(out, " 1.0\nelement vertex " + std::to_string(points.size()) + "\n");
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz"}) append(out, std::string("property float ") + p + "\n");
  append(out, "end_header\n");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const float vals[6] = {float(points[i].x),  float(points[i].y),  float(points[i].z),
                           float(normals[i].x), float(normals[i].y), float(normals[i].z)};
    if (binary) {
      for (float f : vals) put_f32(out, f);
    } else {
      for (int k = 0; k < 6; ++k) {
        if (k) out.push_back(' ');
        append(out, fmt_float(vals[k]));
      }
      out.push_back('\n');
    }
  }
  return out;
}

Bytes write_ply_oriented(std::span<const OrientedPoint> cloud, bool binary) {
  std::vector<Vec3> points, normals;
  points.reserve(cloud.size());
  normals.reserve(cloud.size());
  for (const auto& p : cloud) {
    points.push_back(p.position);
    normals.push_back(p.normal);
  }
  return write_ply_oriented(points, normals, binary);
}

std::vector<OrientedPoint> read_ply_oriented(ByteView bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw FormatError("truncated PLY header", start);
    std::string_view line(reinterpret_cast<const char*>(bytes.data()) + start, pos - start);
    ++pos;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  if (next_line() != "ply") throw FormatError("missing 'ply' magic", 0);
  std::size_t at = pos;
  const auto format = next_line();
  bool binary = false;
  if (format == "format binary_little_endian 1.0") binary = true;
  else if (format != "format ascii 1.0") throw FormatError("unsupported PLY format line", at);

  std::size_t count = 0;
  bool have_vertex = false;
  std::vector<std::string> props;
  while (true) {
    at = pos;
    const auto line = next_line();
    if (line == "end_header") break;
    if (line.starts_with("comment")) continue;
    if (line.starts_with("element vertex ")) {
      if (have_vertex) throw FormatError("duplicate vertex element", at);
      count = parse_token<std::size_t>(bytes, line.substr(15), "vertex count");
      have_vertex = true;
    } else if (line.starts_with("property float ") && have_vertex) {
      props.emplace_back(line.substr(15));
    } else {
      throw FormatError("unsupported PLY header line", at);
    }
  }
  const std::vector<std::string> expected{"x", "y", "z", "nx", "ny", "nz"};
  if (!have_vertex || props != expected) throw FormatError("expected float x y z nx ny nz vertices", pos);

  std::vector<OrientedPoint> cloud;
  if (binary) {
    if (count > (bytes.size() - pos) / 24) throw FormatError("truncated PLY payload", bytes.size());
    cloud.reserve(count);
    for (std::size_t i = 0; i < count; ++i, pos += 24) {
      const std::uint8_t* p = bytes.data() + pos;
      cloud.push_back({{get_f32(p, true), get_f32(p + 4, true), get_f32(p + 8, true)},
                       {get_f32(p + 12, true), get_f32(p + 16, true), get_f32(p + 20, true)}});
    }
    return cloud;
  }
  if (count > bytes.size()) throw FormatError("PLY vertex count exceeds file size", at);
  cloud.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    float vals[6];
    for (float& f : vals) {
      const auto tok = next_token(bytes, pos, "vertex value");
      f = parse_token<float>(bytes, tok, "vertex value");
    }
    cloud.push_back({{vals[0], vals[1], vals[2]}, {vals[3], vals[4], vals[5]}});
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// JSON stats

Bytes write_stats_json(const ErrorStats& stats, const std::string& label, const nlohmann::json& config) {
  nlohmann::json j;
  j["label"] = label;
  j["config"] = config;
  j["stats"] = to_json(stats);
  const std::string text = j.dump(2) + "\n";
  return Bytes(text.begin(), text.end());
}

ErrorStats read_stats_json(ByteView bytes) {
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    return stats_from_json(j.at("stats"));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), e.byte);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid stats record: ") + e.what(), 0);
  }
}

// ---------------------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace stereonormal
