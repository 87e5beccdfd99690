#include "stereonormal/reference.hpp"

namespace stereonormal::reference {

AffineField affine_field_direct(const ScalarField& disparity, const KernelSpec& spec) {
  spec.validate();
  AffineField out(disparity.width(), disparity.height());
  for (int v = 0; v < disparity.height(); ++v) {
    for (int u = 0; u < disparity.width(); ++u) {
      bool full = disparity.valid(u, v);
      for (const auto& o : spec.offsets) {
        if (!full) break;
        full = disparity.in_bounds(u + o.dx, v + o.dy) && disparity.valid(u + o.dx, v + o.dy);
      }
      if (!full) continue;
      if (auto a = estimate_affine_direct(disparity, u, v, spec.offsets)) out.set(u, v, *a);
    }
  }
  return out;
}

NormalField normals_fixed(const ScalarField& disparity, const StereoRig& rig, const KernelSpec& spec) {
  const AffineField affine = affine_field_direct(disparity, spec);
  NormalField normals(disparity.width(), disparity.height());
  for (int v = 0; v < disparity.height(); ++v) {
    for (int u = 0; u < disparity.width(); ++u) {
      if (!affine.valid(u, v)) continue;
      const auto X = triangulate(u, v, disparity(u, v), rig);
      if (!X) continue;
      if (auto n = normal_from_affine(warp_from_disparity_affine(affine(u, v)), *X, rig)) normals.set(u, v, *n);
    }
  }
  return normals;
}

AffineField affine_field_adaptive(const ScalarField& disparity, const StereoRig& rig,
                                  const StarConfig& config) {
  const ScalarField depth = disparity_to_depth(disparity, rig);
  const ScalarField edges =
      config.rule == StopRule::simple_threshold ? depth_laplacian(depth) : ScalarField{};
  AffineField out(disparity.width(), disparity.height());
  for (int v = 0; v < disparity.height(); ++v) {
    for (int u = 0; u < disparity.width(); ++u) {
      if (!depth.valid(u, v)) continue;
      const auto support = star_trace(u, v, depth, edges, config);
      if (auto a = estimate_affine_direct(disparity, u, v, support)) out.set(u, v, *a);
    }
  }
  return out;
}

}  // namespace stereonormal::reference
