#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stereonormal/field.hpp"

namespace stereonormal {

/// Angular error statistics in degrees over jointly valid pixels.
struct ErrorStats {
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;  // lower-middle element for even counts
  double std = 0.0;     // population standard deviation
  std::size_t valid_count = 0;

  friend bool operator==(const ErrorStats&, const ErrorStats&) = default;
};

/// Unsigned angle between estimated and reference normals, in degrees, at
/// pixels valid in both fields (and in `region` when it is non-empty).
/// Throws ArgumentError on shape mismatch.
ScalarField angular_error_map(const NormalField& est, const NormalField& gt,
                              std::span<const std::uint8_t> region = {});

/// Throws EmptyInputError when no pixel is valid.
ErrorStats summarize(const ScalarField& errors);

/// Convenience: summarize(angular_error_map(est, gt, region)).
ErrorStats evaluate(const NormalField& est, const NormalField& gt,
                    std::span<const std::uint8_t> region = {});

struct ComparisonTable {
  std::string text;      // fixed-width rows, one per run, sorted by label
  nlohmann::json records;  // array of {label, avg, min, max, median, std, valid_count}
};

ComparisonTable compare_table(std::vector<std::pair<std::string, ErrorStats>> runs);

nlohmann::json to_json(const ErrorStats& stats);
ErrorStats stats_from_json(const nlohmann::json& j);

}  // namespace stereonormal
