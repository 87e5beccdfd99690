#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stereonormal/adaptive_region.hpp"
#include "stereonormal/field.hpp"
#include "stereonormal/stereo_geometry.hpp"

namespace stereonormal {

enum class Method { affine_fixed, affine_adaptive_st, affine_adaptive_cd, pca, cross };

std::optional<Method> parse_method(std::string_view name);
std::string_view method_name(Method method);

/// One estimator plus its parameters.
struct MethodConfig {
  Method method = Method::affine_fixed;
  int kernel = 9;  // affine-fixed and pca
  int directions = 8;
  int max_steps = 10;
  double threshold = 0.1;  // t for ST, k for CD
  bool range_per_pixel = false;

  StarConfig star() const;
  void validate() const;
  /// Row label in the style "Affine 9x9", "CD s10 d8 k0.1".
  std::string label() const;
};

NormalField estimate_normals(const ScalarField& disparity, const StereoRig& rig, const MethodConfig& config);

struct FrameTimes {
  std::vector<double> ms;
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // population
};

/// Wall time of estimate_normals alone, `repeats` runs after `warmup` untimed ones.
FrameTimes time_estimation(const ScalarField& disparity, const StereoRig& rig, const MethodConfig& config,
                           int repeats, int warmup = 1);

}  // namespace stereonormal
