#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsched/distributions.hpp"
#include "qsched/flowsim/discipline.hpp"
#include "qsched/vfs_harness.hpp"

namespace qsched::experiments {

// One traffic configuration simulated under a list of disciplines.
struct SeriesSpec {
  std::string label;
  flowsim::TrafficSpec traffic;
  std::vector<flowsim::Discipline> disciplines;
  // Emit the PSJF batch-model analysis next to the simulation (open-batch,
  // single class, nonatomic sizes).
  bool psjf_analysis = false;
};

struct ExperimentConfig {
  enum class Kind { flow, vfs };

  std::string name = "custom";
  Kind kind = Kind::flow;
  std::vector<SeriesSpec> series;
  std::vector<double> loads;
  int replications = 5;
  std::uint64_t seed = 1;
  std::uint64_t horizon = 1'000'000;  // flows per replication (large flows for vfs)
  std::string x_label = "load";
  vfs::Fig6Options vfs;               // template for vfs experiments
};

// Distribution record {kind, mean?, shape? | cv2?}; mean defaults to 1.
Distribution parse_distribution(const nlohmann::json& j);
nlohmann::json to_json(const Distribution& d);

// Width record {kind, mean?, cv2?, lo?, hi?, p_hi?}.
BatchWidthLaw parse_width(const nlohmann::json& j);
nlohmann::json to_json(const BatchWidthLaw& w);

// Throws std::invalid_argument with the offending field on bad input.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

// JSON schema of the config format.
const char* config_schema();

std::vector<double> default_load_grid();

}  // namespace qsched::experiments
