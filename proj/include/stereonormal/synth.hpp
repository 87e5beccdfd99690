#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stereonormal/field.hpp"
#include "stereonormal/stereo_geometry.hpp"

namespace stereonormal {

struct Sphere {
  Vec3 center;
  double radius = 1.0;
};

/// Axis-aligned box.
struct Box {
  Vec3 min;
  Vec3 max;
};

/// Plane {X : normal . X = offset}; normal is unit length.
struct Plane {
  Vec3 normal{0.0, 0.0, -1.0};
  double offset = -1.0;
};

using Primitive = std::variant<Sphere, Box, Plane>;

/// Primitives in left-camera coordinates (x right, y down, z forward).
struct SceneSpec {
  StereoRig rig;
  int width = 0;
  int height = 0;
  std::vector<Primitive> primitives;

  void validate() const;
};

/// Analytic depth, disparity and camera-facing normals; all three share the
/// hit mask.
struct GroundTruth {
  ScalarField depth;
  ScalarField disparity;
  NormalField normals;
};

/// Nearest positive hit along the left-camera ray through each pixel centre.
GroundTruth raycast(const SceneSpec& scene);

/// Adds independent N(0, sigma) draws to every valid pixel in raster order
/// from a mt19937_64 seeded with `seed`. Throws ArgumentError for sigma < 0.
ScalarField add_gaussian_noise(const ScalarField& field, double sigma, std::uint64_t seed);

/// Closed-form single-plane scene {X : n . X = offset}. Throws ArgumentError
/// unless every pixel ray meets the plane in front of the camera.
GroundTruth make_plane_scene(const Vec3& normal, double offset, const StereoRig& rig, int width,
                             int height);

/// Sphere of radius 1.4 centred 3 units ahead, baseline 0.3, fx = fy = 1024,
/// principal point at (width/2, height/2).
SceneSpec sphere_benchmark_scene(int width = 1024, int height = 1024);

/// Parses the key-value scene format (see docs/formats.md). Throws ConfigError.
SceneSpec parse_scene(std::string_view text);
std::string format_scene(const SceneSpec& scene);

/// Rig-only files: fx, fy, u0, v0, baseline at top level or in a `rig { }`
/// block. fx and baseline are required; fy defaults to fx; a missing principal
/// point is placed at (width/2, height/2) when the image size is given.
StereoRig parse_rig(std::string_view text, int width = 0, int height = 0);
std::string format_rig(const StereoRig& rig);

}  // namespace stereonormal
