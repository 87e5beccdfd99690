#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereonormal/field.hpp"
#include "stereonormal/stereo_geometry.hpp"

namespace stereonormal {

/// Pixel displacement from the observed pixel: dx along columns, dy along rows.
struct Offset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

/// Fixed support shape shared by every pixel of a frame.
struct KernelSpec {
  std::vector<Offset> offsets;

  /// width x width square centred on the pixel (width odd, >= 3), row-major.
  static KernelSpec square(int width);

  /// Throws ArgumentError on duplicate offsets or fewer than two offsets.
  void validate() const;
};

/// Pseudo-inverse rows of the offset matrix for one support shape.
struct PrecomputedKernels {
  std::vector<Offset> offsets;
  std::vector<double> weights_u;  // weights producing a1 - 1
  std::vector<double> weights_v;  // weights producing a2
  double sum_xx = 0.0;            // sum dx^2
  double sum_xy = 0.0;            // sum dx dy
  double sum_yy = 0.0;            // sum dy^2
  double det = 0.0;               // sum_xx sum_yy - sum_xy^2
  double sum_u = 0.0;             // sum weights_u
  double sum_v = 0.0;             // sum weights_v
};

/// Throws SingularConfigurationError when the offsets span fewer than two
/// dimensions, ArgumentError for malformed specs.
PrecomputedKernels build_kernels(const KernelSpec& spec);

/// Two-step convolutional estimate over a whole disparity map:
///   a1 = sum weights_u[i] d_i - d_c sum_u + 1,   a2 = sum weights_v[i] d_i - d_c sum_v.
/// A pixel is estimated only when it and its whole support are in bounds and
/// valid. Parallel over rows.
AffineField convolve_affine(const ScalarField& disparity, const PrecomputedKernels& kernels);

/// Least-squares fit of (a1 - 1, a2) to d_i - d_c over the valid, in-bounds
/// offsets around (u, v), solved by Givens QR on the stacked system. Serves as
/// the serial reference for the convolutional path and the adaptive solver.
/// Empty when the centre is invalid or the usable offsets are rank-deficient.
std::optional<AffineParams> estimate_affine_direct(const ScalarField& disparity, int u, int v,
                                                   std::span<const Offset> offsets);

/// Convolution, triangulation and normal recovery for each pixel.
NormalField estimate_normals_fixed(const ScalarField& disparity, const StereoRig& rig,
                                   const KernelSpec& spec);

/// Same, reusing kernels that were already built.
NormalField estimate_normals_fixed(const ScalarField& disparity, const StereoRig& rig,
                                   const PrecomputedKernels& kernels);

/// Normals from an affine field estimated on disparities (see warp_from_disparity_affine).
NormalField normals_from_affine_field(const AffineField& affine, const ScalarField& disparity,
                                      const StereoRig& rig);

/// Text dump of the kernels: a summary header followed by the weights_u and weights_v
/// grids laid out by offset, rows top to bottom. Cells outside the support
/// print as '.'.
std::string format_kernels(const PrecomputedKernels& kernels);

}  // namespace stereonormal
