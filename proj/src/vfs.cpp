#include "qsched/vfs.hpp"

#include <sstream>
#include <stdexcept>

namespace qsched::vfs {

VfsState::VfsState(VfsConfig cfg, double start_time)
    : cfg_(cfg), last_arrival_(start_time), head_(ring_.end()) {
  if (!(cfg_.capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
  if (!(cfg_.theta >= 0.0)) throw std::invalid_argument("theta must be >= 0");
}

Verdict VfsState::on_arrival(const PacketEvent& pkt) {
  if (pkt.time < last_arrival_) throw std::invalid_argument("packet times must be nondecreasing");
  if (!(pkt.length > 0.0)) throw std::invalid_argument("packet length must be positive");
  if (cfg_.discard_idle_credit && ring_.empty()) {
    credit_ = 0.0;
  } else {
    credit_ += cfg_.capacity * (pkt.time - last_arrival_);
  }
  last_arrival_ = pkt.time;

  auto it = table_.find(pkt.flow);
  if (it != table_.end()) {
    double& vq = it->second->vq;
    if (vq > cfg_.theta) return Verdict::drop;
    vq += pkt.length;
  } else {
    // Tail of the ring is the position just before the head.
    auto pos = ring_.insert(head_, Node{pkt.flow, pkt.length});
    if (head_ == ring_.end()) head_ = pos;
    table_.emplace(pkt.flow, pos);
  }
  accepted_ += pkt.length;
  return Verdict::accept;
}

std::optional<DrainResult> VfsState::decrement_epoch() {
  if (ring_.empty()) return std::nullopt;
  Node& e = *head_;
  FlowId flow = e.flow;
  auto next = std::next(head_);
  if (next == ring_.end()) next = ring_.begin();

  DrainResult r{flow, 0.0, false};
  if (credit_ < e.vq) {
    r.amount = credit_;
    e.vq -= credit_;
    credit_ = 0.0;
  } else {
    r.amount = e.vq;
    credit_ -= e.vq;
    r.removed = true;
    if (next == head_) next = ring_.end();
    ring_.erase(head_);
    table_.erase(flow);
  }
  drained_ += r.amount;
  head_ = ring_.empty() ? ring_.end() : next;
  return r;
}

std::optional<double> VfsState::vq(FlowId f) const {
  auto it = table_.find(f);
  if (it == table_.end()) return std::nullopt;
  return it->second->vq;
}

std::optional<FlowId> VfsState::head() const {
  if (ring_.empty()) return std::nullopt;
  return head_->flow;
}

std::vector<FlowId> VfsState::active_list() const {
  std::vector<FlowId> out;
  if (ring_.empty()) return out;
  Ring::const_iterator it = head_;
  do {
    out.push_back(it->flow);
    if (++it == ring_.end()) it = ring_.begin();
  } while (it != head_);
  return out;
}

double VfsState::queued_bytes() const {
  double s = 0.0;
  for (const auto& n : ring_) s += n.vq;
  return s;
}

void VfsState::check_invariants(double max_packet_length) const {
  auto fail = [](const std::string& what) { throw std::logic_error("VFS invariant: " + what); };
  if (credit_ < 0.0) fail("negative credit");
  if (table_.size() != ring_.size()) fail("flow table and active list differ in size");
  if (!ring_.empty() && head_ == ring_.end()) fail("nonempty list without a head");
  for (const auto& n : ring_) {
    auto it = table_.find(n.flow);
    if (it == table_.end() || &*it->second != &n) fail("listed flow missing from table");
    if (!(n.vq > 0.0)) fail("listed flow with empty virtual queue");
    if (n.vq > cfg_.theta + max_packet_length) {
      std::ostringstream os;
      os << "vq " << n.vq << " above theta + packet length";
      fail(os.str());
    }
  }
}

}  // namespace qsched::vfs
