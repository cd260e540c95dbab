#pragma once

#include <span>
#include <string>
#include <vector>

namespace qsched::experiments {

struct SeriesPoint {
  double load = 0.0;
  double value = 0.0;
  double half_width = 0.0;  // 0 for closed-form series
};

enum class CompareMode {
  relative,       // |obs - ref| <= tol * |ref|
  within_ci,      // |obs - ref| <= half_width + tol * |ref|
  not_above       // obs <= ref + half_width + tol * |ref|
};

struct PointVerdict {
  double load = 0.0;
  double reference = 0.0;
  double observed = 0.0;
  double half_width = 0.0;
  double rel_error = 0.0;
  bool ci_overlap = false;  // |obs - ref| <= half_width
  bool pass = false;
};

struct Verdict {
  bool pass = true;
  double max_rel_error = 0.0;
  std::vector<PointVerdict> points;

  std::string summary() const;
};

// Point-by-point comparison of a reference series against an observed one.
// Throws std::invalid_argument when the load grids differ.
Verdict compare(std::span<const SeriesPoint> reference,
                std::span<const SeriesPoint> observed, CompareMode mode,
                double tolerance);

}  // namespace qsched::experiments
