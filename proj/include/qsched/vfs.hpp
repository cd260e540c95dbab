#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

namespace qsched::vfs {

using FlowId = std::uint64_t;

struct PacketEvent {
  double time = 0.0;
  FlowId flow = 0;
  double length = 1500.0;  // bytes
};

enum class Verdict { accept, drop };

struct VfsConfig {
  double capacity = 1500.0;     // bytes per time unit
  double theta = 5 * 1500.0;    // bytes
  // Capacity that elapses while the active list is empty cannot serve any
  // virtual queue; when set, it is not banked as credit.
  bool discard_idle_credit = true;
};

struct DrainResult {
  FlowId flow = 0;
  double amount = 0.0;
  bool removed = false;
};

// Virtual fair scheduling: per-flow virtual queue byte counters, drained in
// round robin from a shared credit that accrues at the link capacity.
// Packets of a flow whose counter exceeds theta are dropped.
class VfsState {
 public:
  explicit VfsState(VfsConfig cfg = {}, double start_time = 0.0);

  // Credits C * (t_n - t_{n-1}), then admits or drops the packet.
  Verdict on_arrival(const PacketEvent& pkt);

  // Drains min(credit, vq) from the head flow, removes it if empty and
  // steps the head one position. No-op on an empty list.
  std::optional<DrainResult> decrement_epoch();

  double credit() const { return credit_; }
  double theta() const { return cfg_.theta; }
  double capacity() const { return cfg_.capacity; }
  double last_arrival() const { return last_arrival_; }
  const VfsConfig& config() const { return cfg_; }

  std::size_t active_count() const { return ring_.size(); }
  bool contains(FlowId f) const { return table_.contains(f); }
  std::optional<double> vq(FlowId f) const;
  std::optional<FlowId> head() const;
  // Active flows in round-robin order starting at the head.
  std::vector<FlowId> active_list() const;

  double accepted_bytes() const { return accepted_; }
  double drained_bytes() const { return drained_; }
  double queued_bytes() const;

  // Throws std::logic_error when a structural invariant is broken.
  void check_invariants(double max_packet_length) const;

 private:
  struct Node {
    FlowId flow;
    double vq;
  };
  using Ring = std::list<Node>;

  VfsConfig cfg_;
  double credit_ = 0.0;
  double last_arrival_;
  Ring ring_;
  Ring::iterator head_;
  std::unordered_map<FlowId, Ring::iterator> table_;
  double accepted_ = 0.0;
  double drained_ = 0.0;
};

}  // namespace qsched::vfs
