#include "stereonormal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace stereonormal {

double SymmetricMatrix3::norm() const {
  return std::sqrt(xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz));
}

namespace {

/// Unit vector orthogonal to the rows of (c - shift I); c has rank 2 there.
Vec3 null_vector(const SymmetricMatrix3& c, double shift) {
  const Vec3 r0{c.xx - shift, c.xy, c.xz};
  const Vec3 r1{c.xy, c.yy - shift, c.yz};
  const Vec3 r2{c.xz, c.yz, c.zz - shift};
  const Vec3 candidates[3] = {cross(r0, r1), cross(r0, r2), cross(r1, r2)};
  const Vec3* best = &candidates[0];
  double best_len = dot(candidates[0], candidates[0]);
  for (const auto& cand : candidates) {
    const double len = dot(cand, cand);
    if (len > best_len) {
      best_len = len;
      best = &cand;
    }
  }
  if (!(best_len > 0.0)) return {1.0, 0.0, 0.0};
  return *best / std::sqrt(best_len);
}

/// Orthonormal pair (u, v) completing w to a right-handed basis.
void complete_basis(const Vec3& w, Vec3& u, Vec3& v) {
  if (std::abs(w.x) > std::abs(w.y)) {
    u = Vec3{-w.z, 0.0, w.x} / std::hypot(w.x, w.z);
  } else {
    u = Vec3{0.0, w.z, -w.y} / std::hypot(w.y, w.z);
  }
  v = cross(w, u);
}

}  // namespace

std::array<EigenPair, 3> eig3_symmetric(const SymmetricMatrix3& m) {
  const double scale = std::max({std::abs(m.xx), std::abs(m.xy), std::abs(m.xz), std::abs(m.yy),
                                 std::abs(m.yz), std::abs(m.zz)});
  std::array<EigenPair, 3> out{EigenPair{m.xx, {1, 0, 0}}, EigenPair{m.yy, {0, 1, 0}},
                               EigenPair{m.zz, {0, 0, 1}}};
  auto finish = [&m, &out] {
    for (auto& e : out) e.value = dot(e.vector, m * e.vector);
    std::sort(out.begin(), out.end(),
              [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
    return out;
  };
  if (!(scale > 0.0) || !std::isfinite(scale)) return finish();

  SymmetricMatrix3 a{m.xx / scale, m.xy / scale, m.xz / scale,
                     m.yy / scale, m.yz / scale, m.zz / scale};
  const double q = a.trace() / 3.0;
  SymmetricMatrix3 b = a;
  b.xx -= q;
  b.yy -= q;
  b.zz -= q;
  const double p2 = b.xx * b.xx + b.yy * b.yy + b.zz * b.zz +
                    2.0 * (b.xy * b.xy + b.xz * b.xz + b.yz * b.yz);
  const double p = std::sqrt(p2 / 6.0);
  if (!(p > 0.0)) return finish();  // scalar matrix: any basis

  SymmetricMatrix3 c{b.xx / p, b.xy / p, b.xz / p, b.yy / p, b.yz / p, b.zz / p};
  const double r = std::clamp(c.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double root_max = 2.0 * std::cos(phi);
  const double root_min = 2.0 * std::cos(phi + 2.0 * std::numbers::pi / 3.0);

  // The root farther from the middle one is well separated.
  const double isolated = r >= 0.0 ? root_max : root_min;
  const Vec3 w = null_vector(c, isolated);

  Vec3 u, v;
  complete_basis(w, u, v);
  const double uu = dot(u, c * u);
  const double uv = dot(u, c * v);
  const double vv = dot(v, c * v);
  double cs = 1.0;
  double sn = 0.0;
  if (uv != 0.0) {
    const double theta = 0.5 * std::atan2(2.0 * uv, uu - vv);
    cs = std::cos(theta);
    sn = std::sin(theta);
  }
  out[0].vector = w;
  out[1].vector = normalized(cs * u + sn * v);
  out[2].vector = normalized(-sn * u + cs * v);
  return finish();
}

std::optional<Vec3> fit_plane_normal(std::span<const Vec3> points) {
  if (points.size() < 3) return std::nullopt;
  Vec3 mean;
  for (const auto& p : points) mean += p;
  mean = mean / double(points.size());
  SymmetricMatrix3 cov;
  for (const auto& p : points) {
    const Vec3 q = p - mean;
    cov.xx += q.x * q.x;
    cov.xy += q.x * q.y;
    cov.xz += q.x * q.z;
    cov.yy += q.y * q.y;
    cov.yz += q.y * q.z;
    cov.zz += q.z * q.z;
  }
  const auto eig = eig3_symmetric(cov);
  // Collinear or coincident points leave the plane undetermined.
  if (!(eig[2].value > 0.0) || !(eig[1].value > 1e-12 * eig[2].value)) return std::nullopt;
  return normalized(eig[0].vector);
}

NormalField estimate_normals_pca(const ScalarField& disparity, const StereoRig& rig, int window) {
  rig.validate();
  if (window < 3 || window % 2 == 0) throw ArgumentError("PCA window must be odd and >= 3");
  const int w = disparity.width();
  const int h = disparity.height();
  const int r = window / 2;
  const NormalField points = triangulate_field(disparity, rig);
  NormalField normals(w, h);

#pragma omp parallel
  {
    std::vector<Vec3> window_points;
    window_points.reserve(std::size_t(window) * std::size_t(window));
#pragma omp for schedule(static)
    for (int v = r; v < h - r; ++v) {
      for (int u = r; u < w - r; ++u) {
        if (!points.valid(u, v)) continue;
        window_points.clear();
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            if (points.valid(u + dx, v + dy)) window_points.push_back(points(u + dx, v + dy));
        const auto n = fit_plane_normal(window_points);
        if (!n) continue;
        if (auto facing = orient_toward_camera(*n, points(u, v))) normals.set(u, v, *facing);
      }
    }
  }
  return normals;
}

NormalField estimate_normals_cross(const ScalarField& disparity, const StereoRig& rig) {
  rig.validate();
  const int w = disparity.width();
  const int h = disparity.height();
  const NormalField points = triangulate_field(disparity, rig);
  NormalField normals(w, h);

#pragma omp parallel for schedule(static)
  for (int v = 1; v < h - 1; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      if (!points.valid(u, v) || !points.valid(u - 1, v) || !points.valid(u + 1, v) ||
          !points.valid(u, v - 1) || !points.valid(u, v + 1)) {
        continue;
      }
      const Vec3 du = points(u + 1, v) - points(u - 1, v);
      const Vec3 dv = points(u, v + 1) - points(u, v - 1);
      const Vec3 n = cross(du, dv);
      const double len = norm(n);
      if (!(len > 0.0) || !std::isfinite(len)) continue;
      if (auto o = orient_toward_camera(n / len, points(u, v))) normals.set(u, v, *o);
    }
  }
  return normals;
}

}  // namespace stereonormal
