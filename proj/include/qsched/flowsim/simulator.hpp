#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qsched/flowsim/discipline.hpp"
#include "qsched/flowsim/report.hpp"

namespace qsched::flowsim {

enum class EventKind { arrival, departure };

struct LogEvent {
  double time = 0.0;
  EventKind kind = EventKind::arrival;
  std::uint64_t flow = 0;        // flow arrival index
  int cls = 0;
  double remaining_work = 0.0;   // total work in system after the event
};

void write_log_header(std::ostream& os);
void write_log_event(std::ostream& os, const LogEvent& e);

struct SimOptions {
  // Flows by arrival index: the first warmup_fraction are discarded, the
  // rest are measured and the run lasts until all of them have completed.
  std::uint64_t horizon = 1'000'000;
  std::uint64_t seed = 1;
  double warmup_fraction = 0.2;
  int bins = 30;
  // Verifies the work-conservation identity at every event. O(n) per event.
  bool check_conservation = false;
  std::function<void(const LogEvent&)> log;
};

// One replication. Identical (spec, discipline, options) give identical
// reports. Throws std::invalid_argument for invalid or unstable specs.
SimReport run(const TrafficSpec& spec, const Discipline& disc,
              const SimOptions& opts);

// `replications` runs seeded derive_seed(opts.seed, r), pooled.
SimReport run_replicated(const TrafficSpec& spec, const Discipline& disc,
                         const SimOptions& opts, int replications);

// Fixed arrival trace: consecutive entries with the same batch id form one
// batch arriving at the first entry's time.
struct TraceFlow {
  double time = 0.0;
  std::uint64_t batch = 0;
  double size = 1.0;
  int cls = 0;
};

struct TraceDeparture {
  std::uint64_t flow = 0;  // position in the trace
  double time = 0.0;
};

struct TraceResult {
  std::vector<TraceDeparture> departures;  // in completion order
  std::vector<double> batch_completion;    // per batch, in arrival order
  std::vector<double> batch_arrival;
};

TraceResult replay(std::span<const TraceFlow> trace, const Discipline& disc,
                   const std::function<void(const LogEvent&)>& log = {});

}  // namespace qsched::flowsim
