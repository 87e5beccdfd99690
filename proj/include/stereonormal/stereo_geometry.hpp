#pragma once

#include <optional>

#include "stereonormal/field.hpp"
#include "stereonormal/vec3.hpp"

namespace stereonormal {

/// Rectified pin-hole pair. The right camera sits at (baseline, 0, 0) in the
/// left camera frame; both share the intrinsics. Disparity is d = u_left - u_right.
struct StereoRig {
  double fx = 1024.0;
  double fy = 1024.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double baseline = 1.0;

  /// Throws ArgumentError unless fx, fy and baseline are positive and finite.
  void validate() const;

  friend bool operator==(const StereoRig&, const StereoRig&) = default;
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// z = fx * b / d. Empty for d <= 0 or non-finite d.
std::optional<double> disparity_to_depth(double disparity, const StereoRig& rig);
std::optional<double> depth_to_disparity(double depth, const StereoRig& rig);

/// Per-pixel depth map; pixels with invalid or non-positive disparity are invalid.
ScalarField disparity_to_depth(const ScalarField& disparity, const StereoRig& rig);

/// Left-camera 3D point seen at pixel (u, v) with the given disparity.
std::optional<Vec3> triangulate(double u, double v, double disparity, const StereoRig& rig);

/// Triangulated point grid; invalid wherever the disparity is.
NormalField triangulate_field(const ScalarField& disparity, const StereoRig& rig);

PixelCoord project_left(const Vec3& X, const StereoRig& rig);
PixelCoord project_right(const Vec3& X, const StereoRig& rig);

/// Flips n so that it faces the camera (n . X <= 0). Empty for a zero or
/// non-finite vector. n . X == 0 is returned unchanged.
std::optional<Vec3> orient_toward_camera(const Vec3& n, const Vec3& X);

/// Forward model: warp parameters of the left-to-right patch map for a plane
/// with normal n through X. Scale-invariant in n.
/// Throws DegeneratePlaneError when |n . X| is below 1e-12 |n| |X|.
AffineParams affine_from_normal(const Vec3& n, const Vec3& X, const StereoRig& rig);

/// Unit camera-facing normal from left-to-right warp parameters at X.
///
/// n is parallel to (a1 X - (x - b, y, z)) x (a2 fy X - (0, -b fx, 0)).
/// Empty when X.z <= 0 or the cross product vanishes.
std::optional<Vec3> normal_from_affine(const AffineParams& a, const Vec3& X, const StereoRig& rig);

/// Least-squares fits on d = u_left - u_right give (1 + dd/du, dd/dv); the
/// left-to-right warp is (1 - dd/du, -dd/dv). This maps the former onto the latter.
constexpr AffineParams warp_from_disparity_affine(const AffineParams& fitted) {
  return {2.0 - fitted.a1, -fitted.a2};
}

}  // namespace stereonormal
