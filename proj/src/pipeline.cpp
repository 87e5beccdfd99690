#include "stereonormal/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "stereonormal/affine_kernel.hpp"
#include "stereonormal/baselines.hpp"

namespace stereonormal {

namespace {
constexpr std::pair<Method, std::string_view> kNames[] = {
    {Method::affine_fixed, "affine-fixed"},
    {Method::affine_adaptive_st, "affine-adaptive-st"},
    {Method::affine_adaptive_cd, "affine-adaptive-cd"},
    {Method::pca, "pca"},
    {Method::cross, "cross"},
};
}  // namespace

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [m, n] : kNames)
    if (n == name) return m;
  return std::nullopt;
}

std::string_view method_name(Method method) {
  for (const auto& [m, n] : kNames)
    if (m == method) return n;
  return "unknown";
}

StarConfig MethodConfig::star() const {
  StarConfig s;
  s.directions = directions;
  s.max_steps = max_steps;
  s.rule = method == Method::affine_adaptive_st ? StopRule::simple_threshold : StopRule::covered_depth;
  s.threshold = threshold;
  s.range_per_pixel = range_per_pixel;
  return s;
}

void MethodConfig::validate() const {
  switch (method) {
    case Method::affine_fixed:
    case Method::pca:
      if (kernel < 3 || kernel % 2 == 0) throw ArgumentError("kernel width must be odd and >= 3");
      break;
    case Method::affine_adaptive_st:
    case Method::affine_adaptive_cd:
      star().validate();
      break;
    case Method::cross:
      break;
  }
}

std::string MethodConfig::label() const {
  std::ostringstream os;
  switch (method) {
    case Method::affine_fixed:
      os << "Affine " << kernel << "x" << kernel;
      break;
    case Method::pca:
      os << "PCA " << kernel << "x" << kernel;
      break;
    case Method::affine_adaptive_st:
      os << "ST s" << max_steps << " d" << directions << " t" << threshold;
      break;
    case Method::affine_adaptive_cd:
      os << "CD s" << max_steps << " d" << directions << " k" << threshold;
      break;
    case Method::cross:
      os << "Cross";
      break;
  }
  return os.str();
}

NormalField estimate_normals(const ScalarField& disparity, const StereoRig& rig, const MethodConfig& config) {
  config.validate();
  switch (config.method) {
    case Method::affine_fixed:
      return estimate_normals_fixed(disparity, rig, KernelSpec::square(config.kernel));
    case Method::affine_adaptive_st:
    case Method::affine_adaptive_cd:
      return estimate_normals_adaptive(disparity, rig, config.star());
    case Method::pca:
      return estimate_normals_pca(disparity, rig, config.kernel);
    case Method::cross:
      return estimate_normals_cross(disparity, rig);
  }
  throw ArgumentError("unknown method");
}

FrameTimes time_estimation(const ScalarField& disparity, const StereoRig& rig, const MethodConfig& config,
                           int repeats, int warmup) {
  if (repeats < 1) throw ArgumentError("repeats must be >= 1");
  config.validate();
  for (int i = 0; i < warmup; ++i) (void)estimate_normals(disparity, rig, config);

  FrameTimes t;
  t.ms.reserve(std::size_t(repeats));
  for (int i = 0; i < repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const NormalField n = estimate_normals(disparity, rig, config);
    const auto stop = std::chrono::steady_clock::now();
    t.ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  double sum = 0.0;
  for (double x : t.ms) sum += x;
  t.avg = sum / double(t.ms.size());
  t.min = *std::min_element(t.ms.begin(), t.ms.end());
  t.max = *std::max_element(t.ms.begin(), t.ms.end());
  double sq = 0.0;
  for (double x : t.ms) sq += (x - t.avg) * (x - t.avg);
  t.std = std::sqrt(sq / double(t.ms.size()));
  return t;
}

}  // namespace stereonormal
