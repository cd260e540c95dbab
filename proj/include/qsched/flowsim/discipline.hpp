#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qsched/distributions.hpp"

namespace qsched::flowsim {

enum class Policy { srpt, psjf, ps };
enum class Granularity { per_flow, per_batch };

// Scheduling policy and the entity it applies to. Per-batch PSJF is not a
// valid combination.
struct Discipline {
  Granularity granularity = Granularity::per_flow;
  Policy policy = Policy::ps;

  // "per-flow-srpt", "per-batch-ps", ...
  std::string name() const;
  static Discipline parse(std::string_view text);

  friend bool operator==(const Discipline&, const Discipline&) = default;
};

void validate(const Discipline& d);

enum class Model { open_batch, partly_open, closed };

std::string to_string(Model m);
Model parse_model(std::string_view text);

// One traffic class. `width` is the batch width (open-batch) or the burst
// length (partly-open); `think` is the inactivity interval between
// successive flows of a burst or of a closed client.
struct ClassSpec {
  Distribution size = Distribution::exponential(1.0);
  BatchWidthLaw width = BatchWidthLaw::deterministic(1);
  Distribution think = Distribution::exponential(1.0);
  double share = 1.0;
  int clients = 0;
};

struct TrafficSpec {
  Model model = Model::open_batch;
  std::vector<ClassSpec> classes;
  // Offered load for open-batch and partly-open traffic. For the closed
  // model, the PS utilization that think means are calibrated to; a value
  // <= 0 keeps the think laws as given.
  double load = 0.5;
};

// Throws std::invalid_argument on inconsistent specs, including load >= 1
// for the open models.
void validate(const TrafficSpec& spec);

// Closed model: rescales every class's think law to mean c * E[size_k] with
// c chosen so a PS link runs at spec.load. Other models are returned as is.
TrafficSpec resolve_closed(const TrafficSpec& spec);

}  // namespace qsched::flowsim
