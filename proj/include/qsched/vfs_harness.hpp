#pragma once

#include <cstdint>
#include <vector>

#include "qsched/flowsim/report.hpp"
#include "qsched/vfs.hpp"

namespace qsched::vfs {

// Two-component traffic on one VFS link: Poisson arrivals of large flows
// that emit back-to-back at line rate until `packets_per_flow` packets have
// been accepted (a dropped packet is re-offered in the next slot), plus
// Poisson single-packet flows. Time is measured in packet transmission
// times unless capacity/packet size say otherwise.
struct Fig6Options {
  double load = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t large_flows = 2000;  // horizon, by arrival index
  double warmup_fraction = 0.2;
  int packets_per_flow = 3000;
  double packet_bytes = 1500.0;
  double large_share = 0.8;          // fraction of the offered bytes
  VfsConfig vfs{};
  int bins = 30;
  bool check_invariants = false;
};

struct VfsReport {
  double load = 0.0;
  flowsim::Metric norm_fct;   // large-flow FCT / (packets * length / C)
  double p999_active = 0.0;   // |active list| sampled at flow arrivals
  double mean_active = 0.0;
  double drop_rate = 0.0;     // dropped / offered packets
  double theta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t large_completed = 0;
};

// Throws std::invalid_argument unless 0 < load < 1.
VfsReport run_fig6(const Fig6Options& opts);

// n flows permanently backlogged at line rate; counts bytes accepted and
// drained per flow over `packets` offered packets. Sources emit with
// exponential gaps of mean one slot, or strictly every slot when `periodic`
// is set; periodic sources lock the round robin to their arrival phases.
struct BackloggedOptions {
  int flows = 2;
  bool periodic = false;
  std::uint64_t packets = 10'000'000;
  std::uint64_t seed = 1;
  double packet_bytes = 1500.0;
  VfsConfig vfs{};
  bool check_invariants = true;
};

struct BackloggedReport {
  std::vector<double> accepted;
  std::vector<double> drained;
  double accepted_spread = 0.0;  // (max - min) / mean
  double drained_spread = 0.0;
  double min_credit = 0.0;
  double max_vq = 0.0;
};

BackloggedReport run_backlogged(const BackloggedOptions& opts);

}  // namespace qsched::vfs
