#pragma once

#include <array>
#include <optional>
#include <span>

#include "stereonormal/field.hpp"
#include "stereonormal/stereo_geometry.hpp"

namespace stereonormal {

/// Unique entries of a symmetric 3x3 matrix.
struct SymmetricMatrix3 {
  double xx = 0.0, xy = 0.0, xz = 0.0;
  double yy = 0.0, yz = 0.0;
  double zz = 0.0;

  Vec3 operator*(const Vec3& v) const {
    return {xx * v.x + xy * v.y + xz * v.z, xy * v.x + yy * v.y + yz * v.z,
            xz * v.x + yz * v.y + zz * v.z};
  }
  double trace() const { return xx + yy + zz; }
  double determinant() const {
    return xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz);
  }
  /// Frobenius norm.
  double norm() const;
};

struct EigenPair {
  double value = 0.0;
  Vec3 vector;
};

/// Closed-form (trigonometric) eigen-decomposition, eigenvalues ascending,
/// orthonormal eigenvectors. The most isolated eigenvalue's vector comes from
/// cross products of rows of M - lambda I; the remaining pair is solved
/// exactly in the orthogonal complement.
std::array<EigenPair, 3> eig3_symmetric(const SymmetricMatrix3& m);

/// Unit eigenvector of the smallest covariance eigenvalue of `points` (sign
/// unspecified). Empty for fewer than 3 points or a collinear set.
std::optional<Vec3> fit_plane_normal(std::span<const Vec3> points);

/// PCA plane fit over a window x window neighbourhood of triangulated points.
/// Windows that leave the image are invalid; masked pixels inside the window
/// are skipped. Needs >= 3 points spanning two dimensions.
NormalField estimate_normals_pca(const ScalarField& disparity, const StereoRig& rig, int window);

/// n ~ (P(u+1,v) - P(u-1,v)) x (P(u,v+1) - P(u,v-1)).
NormalField estimate_normals_cross(const ScalarField& disparity, const StereoRig& rig);

}  // namespace stereonormal
