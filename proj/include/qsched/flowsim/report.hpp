#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace qsched::flowsim {

// Accumulators of one batch-means bin.
struct Bin {
  double fct_sum = 0.0;
  double size_sum = 0.0;
  double flows = 0.0;
  double bct_sum = 0.0;
  double bsize_sum = 0.0;
  double batches = 0.0;

  Bin& operator+=(const Bin& o);
};

// Point estimate with a 95% confidence half-width from batch means.
struct Metric {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double half_width = std::numeric_limits<double>::quiet_NaN();

  bool contains(double v) const { return std::abs(v - mean) <= half_width; }
  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};

// Normalised FCT is E[FCT] / E[size] and normalised BCT is E[BCT] / E[S],
// both estimated as ratios of sums over the same completed flows/batches.
struct ClassReport {
  Metric fct;
  Metric norm_fct;
  Metric bct;
  Metric norm_bct;
  std::uint64_t flows = 0;
  std::uint64_t batches = 0;
};

struct SimReport {
  std::string discipline;
  std::vector<std::uint64_t> seeds;
  std::vector<ClassReport> classes;
  ClassReport overall;

  double p999_active = 0.0;   // time-stationary 99.9th percentile
  double mean_active = 0.0;
  double utilization = 0.0;   // busy fraction of the observation window

  // Flow conservation: arrivals = completions + in_flight.
  std::uint64_t arrivals = 0;
  std::uint64_t completions = 0;
  std::uint64_t in_flight = 0;
  // Work conservation: work_arrived = work_served + work_in_system.
  double work_arrived = 0.0;
  double work_served = 0.0;
  double work_in_system = 0.0;

  // Raw material kept so replications can be pooled.
  std::vector<std::vector<Bin>> bins;    // [class][bin]
  std::vector<double> occupancy_time;    // time spent with n active entities
  double busy_time = 0.0;
  double observed_time = 0.0;
};

// Recomputes every derived field from bins and occupancy_time.
void finalize(SimReport& r);

// Pools replications of the same discipline and traffic.
SimReport merge(std::span<const SimReport> parts);

double histogram_percentile(std::span<const double> weights, double percent);

// Student-t batch-means estimate over the values (NaNs skipped).
Metric batch_means(std::span<const double> values, double point);

}  // namespace qsched::flowsim
