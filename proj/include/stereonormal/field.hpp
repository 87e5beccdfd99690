#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stereonormal/errors.hpp"
#include "stereonormal/vec3.hpp"

namespace stereonormal {

/// Row-major width x height grid with a per-pixel validity flag.
///
/// Pixel (u, v) is column u, row v, with (0, 0) the top-left pixel center.
/// Values stored at invalid pixels are unspecified and must not be read by
/// estimators.
template <typename T>
class Grid {
 public:
  Grid() = default;

  Grid(int width, int height, const T& fill = T{}, bool valid = false)
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw ArgumentError("grid dimensions must be non-negative");
    }
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    values_.assign(n, fill);
    mask_.assign(n, valid ? 1 : 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return same_shape(other.width(), other.height());
  }

  bool in_bounds(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  const T& operator()(int u, int v) const { return values_[index(u, v)]; }
  T& operator()(int u, int v) { return values_[index(u, v)]; }

  bool valid(int u, int v) const { return mask_[index(u, v)] != 0; }
  bool valid_at(std::size_t i) const { return mask_[i] != 0; }

  /// Stores a value and marks the pixel valid.
  void set(int u, int v, const T& value) {
    const auto i = index(u, v);
    values_[i] = value;
    mask_[i] = 1;
  }
  void invalidate(int u, int v) { mask_[index(u, v)] = 0; }
  void set_valid(std::size_t i, bool flag) { mask_[i] = flag ? 1 : 0; }

  std::span<const T> values() const { return values_; }
  std::span<T> values() { return values_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  std::span<std::uint8_t> mask() { return mask_; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : mask_) n += m != 0;
    return n;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
  std::vector<std::uint8_t> mask_;
};

/// Affine parameters (a1, a2) of a rectified-pair warp; the bottom row is
/// implicitly (0, 1).
struct AffineParams {
  double a1 = 1.0;
  double a2 = 0.0;
  friend bool operator==(const AffineParams&, const AffineParams&) = default;
};

using ScalarField = Grid<double>;
using AffineField = Grid<AffineParams>;
using NormalField = Grid<Vec3>;
using PixelMask = std::vector<std::uint8_t>;

}  // namespace stereonormal
