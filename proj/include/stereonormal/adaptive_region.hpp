#pragma once

#include <optional>
#include <vector>

#include "stereonormal/affine_kernel.hpp"
#include "stereonormal/field.hpp"
#include "stereonormal/stereo_geometry.hpp"

namespace stereonormal {

enum class StopRule {
  simple_threshold,  // ST: stop at pixels whose depth-Laplacian exceeds the threshold
  covered_depth,     // CD: stop when the depth range seen exceeds threshold * centre depth
};

/// Star-fill traversal parameters.
struct StarConfig {
  int directions = 8;
  int max_steps = 10;
  StopRule rule = StopRule::covered_depth;
  /// t for ST (depth units), k for CD (dimensionless). +inf disables stopping.
  double threshold = 0.1;
  /// CD only: track the depth range across all rays of a pixel instead of per ray.
  bool range_per_pixel = false;

  void validate() const;
};

/// |4 z(u,v) - z(u-1,v) - z(u+1,v) - z(u,v-1) - z(u,v+1)| at interior pixels
/// whose four neighbours are valid; border and masked-neighbour pixels are invalid.
ScalarField depth_laplacian(const ScalarField& depth);

/// Offsets selected by star fill from `center`: (0,0) first, then for ray
/// j = 0..M-1 with angle 2 pi j / M (0 along +u) the pixels
/// round(i cos, i sin), i = 1..max_steps, until the ray leaves the image,
/// meets a masked pixel or triggers the stop rule. The triggering pixel is
/// excluded. Duplicates are dropped.
///
/// `edges` is only read under ST and may be empty otherwise.
std::vector<Offset> star_trace(int u, int v, const ScalarField& depth, const ScalarField& edges,
                               const StarConfig& config);

/// Two-pass least squares over the star support: pass one accumulates
/// the offset second moments; pass two applies the solution weights to d_i - d_c.
/// Returns the same quantity as the convolutional path (fit on disparities).
std::optional<AffineParams> estimate_affine_adaptive(const ScalarField& disparity,
                                                     const ScalarField& depth,
                                                     const ScalarField& edges, int u, int v,
                                                     const StarConfig& config);

/// Least squares over an explicit support; the second half of estimate_affine_adaptive.
std::optional<AffineParams> affine_over_support(const ScalarField& disparity, int u, int v,
                                                const std::vector<Offset>& support);

NormalField estimate_normals_adaptive(const ScalarField& disparity, const StereoRig& rig,
                                      const StarConfig& config);

}  // namespace stereonormal
