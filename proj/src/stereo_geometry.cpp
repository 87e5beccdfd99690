#include "stereonormal/stereo_geometry.hpp"

#include <cmath>

namespace stereonormal {

void StereoRig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(fx) || !positive(fy)) throw ArgumentError("focal lengths must be positive");
  if (!positive(baseline)) throw ArgumentError("baseline must be positive");
  if (!std::isfinite(u0) || !std::isfinite(v0)) throw ArgumentError("principal point must be finite");
}

std::optional<double> disparity_to_depth(double disparity, const StereoRig& rig) {
  if (!std::isfinite(disparity) || disparity <= 0.0) return std::nullopt;
  return rig.fx * rig.baseline / disparity;
}

std::optional<double> depth_to_disparity(double depth, const StereoRig& rig) {
  if (!std::isfinite(depth) || depth <= 0.0) return std::nullopt;
  return rig.fx * rig.baseline / depth;
}

ScalarField disparity_to_depth(const ScalarField& disparity, const StereoRig& rig) {
  ScalarField depth(disparity.width(), disparity.height());
  const int w = disparity.width();
  const int h = disparity.height();
#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!disparity.valid(u, v)) continue;
      if (auto z = disparity_to_depth(disparity(u, v), rig)) depth.set(u, v, *z);
    }
  }
  return depth;
}

std::optional<Vec3> triangulate(double u, double v, double disparity, const StereoRig& rig) {
  const auto z = disparity_to_depth(disparity, rig);
  if (!z) return std::nullopt;
  return Vec3{(u - rig.u0) * *z / rig.fx, (v - rig.v0) * *z / rig.fy, *z};
}

NormalField triangulate_field(const ScalarField& disparity, const StereoRig& rig) {
  NormalField points(disparity.width(), disparity.height());
  const int w = disparity.width();
  const int h = disparity.height();
#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!disparity.valid(u, v)) continue;
      if (auto X = triangulate(u, v, disparity(u, v), rig)) points.set(u, v, *X);
    }
  }
  return points;
}

PixelCoord project_left(const Vec3& X, const StereoRig& rig) {
  return {(rig.fx * X.x + rig.u0 * X.z) / X.z, (rig.fy * X.y + rig.v0 * X.z) / X.z};
}

PixelCoord project_right(const Vec3& X, const StereoRig& rig) {
  return {(rig.fx * (X.x - rig.baseline) + rig.u0 * X.z) / X.z, (rig.fy * X.y + rig.v0 * X.z) / X.z};
}

std::optional<Vec3> orient_toward_camera(const Vec3& n, const Vec3& X) {
  if (!is_finite(n) || dot(n, n) == 0.0) return std::nullopt;
  return dot(n, X) > 0.0 ? -n : n;
}

AffineParams affine_from_normal(const Vec3& n, const Vec3& X, const StereoRig& rig) {
  const double nX = dot(n, X);
  if (!(std::abs(nX) > 1e-12 * norm(n) * norm(X))) {
    throw DegeneratePlaneError("plane normal is orthogonal to the viewing ray");
  }
  const double b = rig.baseline;
  const double a1 = (n.x * (X.x - b) + n.y * X.y + n.z * X.z) / nX;
  const double a2 = -b * rig.fx * n.y / (rig.fy * nX);
  return {a1, a2};
}

std::optional<Vec3> normal_from_affine(const AffineParams& a, const Vec3& X, const StereoRig& rig) {
  if (!(X.z > 0.0)) return std::nullopt;
  const double b = rig.baseline;
  const Vec3 row1 = a.a1 * X - Vec3{X.x - b, X.y, X.z};
  const Vec3 row2 = (a.a2 * rig.fy) * X - Vec3{0.0, -b * rig.fx, 0.0};
  const Vec3 n = cross(row1, row2);
  const double len = norm(n);
  if (!(len > 0.0) || !std::isfinite(len)) return std::nullopt;
  return orient_toward_camera(n / len, X);
}

}  // namespace stereonormal
