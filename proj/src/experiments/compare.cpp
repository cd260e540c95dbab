#include "qsched/experiments/compare.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qsched::experiments {

std::string Verdict::summary() const {
  std::ostringstream os;
  os.precision(4);
  os << (pass ? "pass" : "fail") << " (" << points.size() << " points, max rel error "
     << max_rel_error << ")";
  return os.str();
}

Verdict compare(std::span<const SeriesPoint> reference, std::span<const SeriesPoint> observed,
                CompareMode mode, double tolerance) {
  if (reference.size() != observed.size()) {
    throw std::invalid_argument("compare: series lengths differ");
  }
  Verdict v;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto& r = reference[i];
    const auto& o = observed[i];
    if (std::abs(r.load - o.load) > 1e-9) {
      throw std::invalid_argument("compare: load grids differ");
    }
    PointVerdict p;
    p.load = r.load;
    p.reference = r.value;
    p.observed = o.value;
    p.half_width = o.half_width;
    double diff = o.value - r.value;
    p.rel_error = r.value != 0.0 ? std::abs(diff / r.value) : std::abs(diff);
    p.ci_overlap = std::abs(diff) <= o.half_width;
    double slack = tolerance * std::abs(r.value);
    switch (mode) {
      case CompareMode::relative:
        p.pass = std::abs(diff) <= slack;
        break;
      case CompareMode::within_ci:
        p.pass = std::abs(diff) <= o.half_width + slack;
        break;
      case CompareMode::not_above:
        p.pass = diff <= o.half_width + slack;
        break;
    }
    v.max_rel_error = std::max(v.max_rel_error, p.rel_error);
    v.pass = v.pass && p.pass;
    v.points.push_back(p);
  }
  return v;
}

}  // namespace qsched::experiments
