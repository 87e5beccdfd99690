#pragma once

// Serial reference implementations. They follow the simplest route to each
// result and are kept for tests and benchmarks; production callers use the
// parallel kernels in affine_kernel.hpp / adaptive_region.hpp.

#include "stereonormal/adaptive_region.hpp"
#include "stereonormal/affine_kernel.hpp"

namespace stereonormal::reference {

/// Per-pixel Givens-QR least squares with the fixed-kernel border policy
/// (the whole support must be in bounds and valid).
AffineField affine_field_direct(const ScalarField& disparity, const KernelSpec& spec);

NormalField normals_fixed(const ScalarField& disparity, const StereoRig& rig, const KernelSpec& spec);

/// Star-fill supports solved with the direct QR route, one pixel at a time.
AffineField affine_field_adaptive(const ScalarField& disparity, const StereoRig& rig,
                                  const StarConfig& config);

}  // namespace stereonormal::reference
