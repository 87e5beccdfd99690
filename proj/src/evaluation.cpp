#include "stereonormal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace stereonormal {

ScalarField angular_error_map(const NormalField& est, const NormalField& gt,
                              std::span<const std::uint8_t> region) {
  if (!est.same_shape(gt)) throw ArgumentError("normal fields differ in size");
  if (!region.empty() && region.size() != est.size()) throw ArgumentError("region mask size mismatch");
  const int w = est.width();
  const int h = est.height();
  ScalarField errors(w, h);
  constexpr double kDeg = 180.0 / std::numbers::pi;
#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t i = est.index(u, v);
      if (!est.valid_at(i) || !gt.valid_at(i) || (!region.empty() && !region[i])) continue;
      const Vec3& a = est(u, v);
      const Vec3& b = gt(u, v);
      const double la = norm(a);
      const double lb = norm(b);
      if (!(la > 0.0) || !(lb > 0.0)) continue;
      // atan2 form of arccos(|a.b|) keeps precision for tiny angles.
      const double c = std::abs(dot(a, b)) / (la * lb);
      const double s = norm(cross(a, b)) / (la * lb);
      errors.set(u, v, std::atan2(s, std::min(c, 1.0)) * kDeg);
    }
  }
  return errors;
}

ErrorStats summarize(const ScalarField& errors) {
  std::vector<double> vals;
  vals.reserve(errors.valid_count());
  const auto values = errors.values();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (errors.valid_at(i)) vals.push_back(values[i]);
  if (vals.empty()) throw EmptyInputError("no valid pixels to summarize");

  ErrorStats s;
  s.valid_count = vals.size();
  double sum = 0.0;
  s.min = vals.front();
  s.max = vals.front();
  for (double x : vals) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.avg = sum / double(vals.size());
  double sq = 0.0;
  for (double x : vals) sq += (x - s.avg) * (x - s.avg);
  s.std = std::sqrt(sq / double(vals.size()));

  const auto mid = vals.begin() + std::ptrdiff_t((vals.size() - 1) / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  s.median = *mid;
  return s;
}

ErrorStats evaluate(const NormalField& est, const NormalField& gt, std::span<const std::uint8_t> region) {
  return summarize(angular_error_map(est, gt, region));
}

nlohmann::json to_json(const ErrorStats& s) {
  return {{"avg", s.avg},       {"min", s.min}, {"max", s.max},
          {"median", s.median}, {"std", s.std}, {"valid_count", s.valid_count}};
}

ErrorStats stats_from_json(const nlohmann::json& j) {
  ErrorStats s;
  s.avg = j.at("avg").get<double>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.median = j.at("median").get<double>();
  s.std = j.at("std").get<double>();
  s.valid_count = j.at("valid_count").get<std::size_t>();
  return s;
}

ComparisonTable compare_table(std::vector<std::pair<std::string, ErrorStats>> runs) {
  std::stable_sort(runs.begin(), runs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t label_width = 6;
  for (const auto& [label, _] : runs) label_width = std::max(label_width, label.size());

  ComparisonTable table;
  table.records = nlohmann::json::array();
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %10s %10s %10s\n", int(label_width), "method",
                "avg", "min", "max", "median", "std", "pixels");
  table.text = buf;
  for (const auto& [label, s] : runs) {
    std::snprintf(buf, sizeof buf, "%-*s %10.4f %10.4f %10.4f %10.4f %10.4f %10zu\n", int(label_width),
                  label.c_str(), s.avg, s.min, s.max, s.median, s.std, s.valid_count);
    table.text += buf;
    auto rec = to_json(s);
    rec["label"] = label;
    table.records.push_back(std::move(rec));
  }
  return table;
}

}  // namespace stereonormal
