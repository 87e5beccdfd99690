#include "stereonormal/adaptive_region.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stereonormal {

void StarConfig::validate() const {
  if (directions < 3) throw ArgumentError("star fill needs at least 3 directions");
  if (max_steps < 1) throw ArgumentError("star fill needs at least one step");
  if (!(threshold > 0.0)) throw ArgumentError("stop threshold must be positive");
}

ScalarField depth_laplacian(const ScalarField& depth) {
  const int w = depth.width();
  const int h = depth.height();
  ScalarField edges(w, h);
#pragma omp parallel for schedule(static)
  for (int v = 1; v < h - 1; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      if (!depth.valid(u, v) || !depth.valid(u - 1, v) || !depth.valid(u + 1, v) ||
          !depth.valid(u, v - 1) || !depth.valid(u, v + 1)) {
        continue;
      }
      const double lap = 4.0 * depth(u, v) - depth(u - 1, v) - depth(u + 1, v) - depth(u, v - 1) -
                         depth(u, v + 1);
      edges.set(u, v, std::abs(lap));
    }
  }
  return edges;
}

namespace {

/// Ray tables for one StarConfig plus per-thread de-duplication scratch.
class StarTracer {
 public:
  explicit StarTracer(const StarConfig& config)
      : config_(config), side_(2 * config.max_steps + 1), stamp_(std::size_t(side_) * side_, 0) {
    rays_.resize(std::size_t(config.directions));
    for (int j = 0; j < config.directions; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / config.directions;
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      auto& ray = rays_[std::size_t(j)];
      for (int i = 1; i <= config.max_steps; ++i) {
        const Offset o{int(std::round(i * c)), int(std::round(i * s))};
        if (ray.empty() || ray.back() != o) ray.push_back(o);
      }
    }
  }

  void trace(int u, int v, const ScalarField& depth, const ScalarField& edges,
             std::vector<Offset>& out) {
    out.clear();
    if (!depth.in_bounds(u, v) || !depth.valid(u, v)) return;
    if (++generation_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      generation_ = 1;
    }
    mark({0, 0});
    out.push_back({0, 0});

    const bool cd = config_.rule == StopRule::covered_depth;
    const double zc = depth(u, v);
    const double limit = config_.threshold * zc;
    double pixel_min = zc;
    double pixel_max = zc;

    for (const auto& ray : rays_) {
      double zmin = config_.range_per_pixel ? pixel_min : zc;
      double zmax = config_.range_per_pixel ? pixel_max : zc;
      for (const Offset& o : ray) {
        const int pu = u + o.dx;
        const int pv = v + o.dy;
        if (!depth.in_bounds(pu, pv) || !depth.valid(pu, pv)) break;
        if (cd) {
          const double z = depth(pu, pv);
          const double lo = std::min(zmin, z);
          const double hi = std::max(zmax, z);
          if (hi - lo > limit) break;
          zmin = lo;
          zmax = hi;
        } else {
          if (!edges.valid(pu, pv) || edges(pu, pv) > config_.threshold) break;
        }
        if (mark(o)) out.push_back(o);
      }
      if (config_.range_per_pixel) {
        pixel_min = zmin;
        pixel_max = zmax;
      }
    }
  }

 private:
  /// True when `o` had not been seen for the current centre.
  bool mark(const Offset& o) {
    auto& s = stamp_[std::size_t(o.dy + config_.max_steps) * side_ + (o.dx + config_.max_steps)];
    if (s == generation_) return false;
    s = generation_;
    return true;
  }

  StarConfig config_;
  int side_;
  std::vector<std::vector<Offset>> rays_;
  std::vector<unsigned> stamp_;
  unsigned generation_ = 0;
};

}  // namespace

std::vector<Offset> star_trace(int u, int v, const ScalarField& depth, const ScalarField& edges,
                               const StarConfig& config) {
  config.validate();
  if (config.rule == StopRule::simple_threshold && !edges.same_shape(depth)) {
    throw ArgumentError("edge map shape differs from depth map");
  }
  StarTracer tracer(config);
  std::vector<Offset> out;
  tracer.trace(u, v, depth, edges, out);
  return out;
}

std::optional<AffineParams> affine_over_support(const ScalarField& disparity, int u, int v,
                                                const std::vector<Offset>& support) {
  if (!disparity.in_bounds(u, v) || !disparity.valid(u, v)) return std::nullopt;

  double sum_xx = 0.0, sum_xy = 0.0, sum_yy = 0.0;
  for (const auto& o : support) {
    sum_xx += double(o.dx) * o.dx;
    sum_xy += double(o.dx) * o.dy;
    sum_yy += double(o.dy) * o.dy;
  }
  const double det = sum_xx * sum_yy - sum_xy * sum_xy;
  if (!(det > 1e-12 * std::max(1.0, sum_xx * sum_yy))) return std::nullopt;

  const double dc = disparity(u, v);
  double a1m = 0.0;
  double a2 = 0.0;
  for (const auto& o : support) {
    const double diff = disparity(u + o.dx, v + o.dy) - dc;
    a1m += (sum_yy * o.dx - sum_xy * o.dy) / det * diff;
    a2 += (-sum_xy * o.dx + sum_xx * o.dy) / det * diff;
  }
  return AffineParams{a1m + 1.0, a2};
}

std::optional<AffineParams> estimate_affine_adaptive(const ScalarField& disparity,
                                                     const ScalarField& depth,
                                                     const ScalarField& edges, int u, int v,
                                                     const StarConfig& config) {
  if (!disparity.same_shape(depth)) throw ArgumentError("disparity and depth shapes differ");
  const auto support = star_trace(u, v, depth, edges, config);
  return affine_over_support(disparity, u, v, support);
}

NormalField estimate_normals_adaptive(const ScalarField& disparity, const StereoRig& rig,
                                      const StarConfig& config) {
  rig.validate();
  config.validate();
  const int w = disparity.width();
  const int h = disparity.height();
  const ScalarField depth = disparity_to_depth(disparity, rig);
  const ScalarField edges =
      config.rule == StopRule::simple_threshold ? depth_laplacian(depth) : ScalarField{};
  NormalField normals(w, h);

#pragma omp parallel
  {
    StarTracer tracer(config);
    std::vector<Offset> support;
    support.reserve(std::size_t(config.directions) * config.max_steps + 1);
#pragma omp for schedule(dynamic, 4)
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (!depth.valid(u, v)) continue;
        tracer.trace(u, v, depth, edges, support);
        const auto a = affine_over_support(disparity, u, v, support);
        if (!a) continue;
        const auto X = triangulate(u, v, disparity(u, v), rig);
        if (!X) continue;
        if (auto n = normal_from_affine(warp_from_disparity_affine(*a), *X, rig)) normals.set(u, v, *n);
      }
    }
  }
  return normals;
}

}  // namespace stereonormal
