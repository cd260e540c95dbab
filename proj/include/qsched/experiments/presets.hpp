#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsched/experiments/config.hpp"
#include "qsched/experiments/runner.hpp"

namespace qsched::experiments {

struct CheckOutcome {
  bool pass = false;
  std::string detail;
};

// A tolerance attached to a preset. Returns nullopt when the points it
// needs are absent from the results (e.g. after a --loads override).
struct Check {
  std::string name;
  std::function<std::optional<CheckOutcome>(const ResultSet&)> run;
};

struct Preset {
  std::string id;
  std::string description;
  ExperimentConfig config;
  std::vector<Check> checks;
};

std::vector<std::string> preset_ids();

// Throws std::invalid_argument for an unknown id.
Preset make_preset(std::string_view id);

// Shared check building blocks.
std::optional<CheckOutcome> check_psjf_within_ci(const ResultSet& r, const std::string& series,
                                                 const std::string& metric);
std::optional<CheckOutcome> check_ps_baseline(const ResultSet& r, const std::string& series,
                                              double tolerance);
std::optional<CheckOutcome> check_srpt_not_above_psjf(const ResultSet& r,
                                                      const std::string& series);
// Per-flow SRPT vs PS batch completion ordering at one load; srpt_worse
// selects the expected direction. Also per-batch SRPT <= per-batch PS <
// both per-flow disciplines.
std::optional<CheckOutcome> check_bct_ordering(const ResultSet& r, const std::string& series,
                                               double load, bool srpt_worse);
std::optional<CheckOutcome> check_burst_gap_shrinks(const ResultSet& r,
                                                    const std::vector<std::string>& series,
                                                    double load);
std::optional<CheckOutcome> check_srpt_overall_worse(const ResultSet& r, const std::string& series,
                                                     double min_load);
std::optional<CheckOutcome> check_class_starvation(const ResultSet& r, const std::string& series,
                                                   int cls, double min_load);
std::optional<CheckOutcome> check_srpt_insensitive(const ResultSet& r, const std::string& a,
                                                   const std::string& b, double tolerance);
std::optional<CheckOutcome> check_vfs_fct(const ResultSet& r, double min_load, double tolerance);
std::optional<CheckOutcome> check_vfs_p999(const ResultSet& r, double load, double target,
                                           double slack);

}  // namespace qsched::experiments
