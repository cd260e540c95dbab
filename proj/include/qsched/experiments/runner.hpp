#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "qsched/experiments/config.hpp"
#include "qsched/flowsim/report.hpp"
#include "qsched/vfs_harness.hpp"

namespace qsched::experiments {

// Closed-form curve evaluated at one load.
struct AnalysisRow {
  std::string series;
  std::string discipline;     // "per-flow-psjf", "ps", ...
  double load = 0.0;
  std::string metric;         // "norm_fct", "norm_bct", "p999_active"
  std::string normalization;  // "E[X]", "E[S]" or "none"
  double value = 0.0;
  double error = 0.0;         // quadrature error estimate
};

struct SimRow {
  std::string series;
  flowsim::Discipline discipline;
  double load = 0.0;
  bool has_batches = false;
  flowsim::SimReport report;
};

struct ResultSet {
  std::string figure;
  std::string x_label = "load";
  std::uint64_t seed = 0;
  std::vector<AnalysisRow> analysis;
  std::vector<SimRow> sims;
  std::vector<vfs::VfsReport> vfs;

  const SimRow* find(std::string_view series, std::string_view discipline,
                     double load) const;
  const AnalysisRow* find_analysis(std::string_view series,
                                   std::string_view metric, double load) const;
};

// Worker count: hardware concurrency, capped by QSCHED_THREADS when set.
int worker_count();

using Progress = std::function<void(const std::string&)>;

// Runs every (series, discipline, load, replication) job of the config and
// assembles the results in config order, independent of scheduling.
ResultSet execute(const ExperimentConfig& config, int threads = worker_count(),
                  const Progress& progress = {});

// Closed-form rows only.
std::vector<AnalysisRow> analysis_rows(const ExperimentConfig& config);

}  // namespace qsched::experiments
