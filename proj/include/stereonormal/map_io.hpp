#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereonormal/evaluation.hpp"
#include "stereonormal/field.hpp"
#include "stereonormal/stereo_geometry.hpp"

namespace stereonormal {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

struct PfmHeader {
  int channels = 1;  // 1 for "Pf", 3 for "PF"
  int width = 0;
  int height = 0;
  double scale = -1.0;  // negative: little-endian payload
  std::size_t payload_offset = 0;
};

/// Parses the three header lines. Throws FormatError.
PfmHeader read_pfm_header(ByteView bytes);

/// Grayscale "Pf" map; non-finite samples become invalid pixels.
ScalarField read_pfm(ByteView bytes);
/// "Pf\n<w> <h>\n-1.0\n", float32 little-endian, rows bottom-up; invalid -> +inf.
Bytes write_pfm(const ScalarField& field);

/// Three-channel "PF" normal map; a pixel is invalid when any channel is non-finite.
NormalField read_normal_pfm(ByteView bytes);
/// Invalid pixels are written as NaN triplets.
Bytes write_normal_pfm(const NormalField& normals);

/// 16-bit grayscale PNG: raw == invalid_value -> masked, else d = (raw - 1) / scale.
ScalarField read_disparity_png16(ByteView bytes, double scale = 256.0, std::uint16_t invalid_value = 0);
/// raw = round(d * scale) + 1 clamped to [1, 65535]; invalid -> invalid_value.
Bytes write_disparity_png16(const ScalarField& disparity, double scale = 256.0,
                            std::uint16_t invalid_value = 0);

/// RGB = round-half-up(255 (n + 1) / 2); invalid pixels are white.
Bytes write_normal_png(const NormalField& normals);
/// 8-bit grayscale, 255 where valid.
Bytes write_mask_png(std::span<const std::uint8_t> mask, int width, int height);

/// Decoded 8-bit PNG (gray or RGB), used to inspect written images.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};
Image8 read_png8(ByteView bytes);

struct OrientedPoint {
  Vec3 position;
  Vec3 normal;
};

/// Valid pixels of `normals` (and `disparity`) in raster order.
std::vector<OrientedPoint> oriented_cloud(const ScalarField& disparity, const NormalField& normals,
                                          const StereoRig& rig);

/// Vertices with float x y z nx ny nz, ASCII or binary little-endian.
Bytes write_ply_oriented(std::span<const Vec3> points, std::span<const Vec3> normals, bool binary);
Bytes write_ply_oriented(std::span<const OrientedPoint> cloud, bool binary);
/// Reads files produced by write_ply_oriented (either encoding).
std::vector<OrientedPoint> read_ply_oriented(ByteView bytes);

/// {"label", "config", "stats": {...}}.
Bytes write_stats_json(const ErrorStats& stats, const std::string& label,
                       const nlohmann::json& config = nlohmann::json::object());
ErrorStats read_stats_json(ByteView bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView bytes);

}  // namespace stereonormal
