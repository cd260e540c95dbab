#include "qsched/flowsim/server.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>

namespace qsched::flowsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void init_slot(EntitySlot& s) {
  if (s.entity.segments.empty()) throw std::invalid_argument("entity without flows");
  s.next = 0;
  s.seg_rem = s.entity.segments[0].size;
  s.rest = 0.0;
  for (std::size_t i = 1; i < s.entity.segments.size(); ++i) {
    s.rest += s.entity.segments[i].size;
  }
}

}  // namespace

std::uint32_t SlotStore::put(Entity e) {
  std::uint32_t i;
  if (!free_.empty()) {
    i = free_.back();
    free_.pop_back();
  } else {
    i = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  }
  slots_[i].entity = std::move(e);
  init_slot(slots_[i]);
  return i;
}

void SlotStore::release(std::uint32_t i) { free_.push_back(i); }

std::unique_ptr<Server> make_server(Policy policy) {
  switch (policy) {
    case Policy::srpt:
      return std::make_unique<PriorityServer>(true);
    case Policy::psjf:
      return std::make_unique<PriorityServer>(false);
    case Policy::ps:
      return std::make_unique<PsServer>();
  }
  return nullptr;
}

// --- PriorityServer --------------------------------------------------------

double PriorityServer::key_of(const EntitySlot& s, double live_seg_rem) const {
  if (!by_remaining_) {
    double total = 0.0;
    for (const auto& seg : s.entity.segments) total += seg.size;
    return total;
  }
  return live_seg_rem + s.rest;
}

void PriorityServer::start_head(std::uint32_t slot, double now) {
  head_ = slot;
  has_head_ = true;
  head_start_ = now;
}

void PriorityServer::admit(Entity entity, double now) {
  std::uint32_t slot = store_.put(std::move(entity));
  EntitySlot& fresh = store_[slot];
  if (!has_head_) {
    start_head(slot, now);
    return;
  }
  EntitySlot& head = store_[head_];
  double live = head.seg_rem - (now - head_start_);
  double head_key = key_of(head, live);
  double fresh_key = key_of(fresh, fresh.seg_rem);
  if (fresh_key < head_key) {
    head.seg_rem = live;
    waiting_.push_back({head_key, head.entity.id, head_});
    std::push_heap(waiting_.begin(), waiting_.end(), std::greater<>{});
    start_head(slot, now);
  } else {
    waiting_.push_back({fresh_key, fresh.entity.id, slot});
    std::push_heap(waiting_.begin(), waiting_.end(), std::greater<>{});
  }
}

double PriorityServer::next_departure() const {
  return has_head_ ? head_start_ + store_[head_].seg_rem : kInf;
}

Departure PriorityServer::depart() {
  if (!has_head_) throw std::logic_error("departure from an idle link");
  EntitySlot& s = store_[head_];
  Departure d;
  d.time = head_start_ + s.seg_rem;
  d.flow = s.entity.segments[s.next].flow;
  d.entity = s.entity.id;
  ++s.next;
  if (s.next < s.entity.segments.size()) {
    s.seg_rem = s.entity.segments[s.next].size;
    s.rest = s.next + 1 < s.entity.segments.size() ? s.rest - s.seg_rem : 0.0;
    head_start_ = d.time;
    return d;
  }
  d.entity_done = true;
  store_.release(head_);
  if (waiting_.empty()) {
    has_head_ = false;
  } else {
    std::pop_heap(waiting_.begin(), waiting_.end(), std::greater<>{});
    start_head(waiting_.back().slot, d.time);
    waiting_.pop_back();
  }
  return d;
}

double PriorityServer::work_in_system(double now) const {
  if (!has_head_) return 0.0;
  const EntitySlot& head = store_[head_];
  double w = head.seg_rem - (now - head_start_) + head.rest;
  for (const auto& k : waiting_) w += store_[k.slot].seg_rem + store_[k.slot].rest;
  return w;
}

std::vector<std::pair<std::uint64_t, double>> PriorityServer::rates(double) const {
  std::vector<std::pair<std::uint64_t, double>> out;
  if (has_head_) out.emplace_back(store_[head_].entity.id, 1.0);
  for (const auto& k : waiting_) out.emplace_back(k.id, 0.0);
  return out;
}

// --- PsServer --------------------------------------------------------------

void PsServer::advance(double now) {
  if (active_ > 0) virtual_ += (now - last_) / static_cast<double>(active_);
  last_ = now;
}

void PsServer::admit(Entity entity, double now) {
  advance(now);
  std::uint32_t slot = store_.put(std::move(entity));
  EntitySlot& s = store_[slot];
  s.v_end = virtual_ + s.seg_rem + s.rest;
  heap_.push_back({virtual_ + s.seg_rem, s.entity.id, slot});
  std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
  ++active_;
}

double PsServer::next_departure() const {
  if (active_ == 0) return kInf;
  double dv = std::max(0.0, heap_.front().vfinish - virtual_);
  return last_ + dv * static_cast<double>(active_);
}

Departure PsServer::depart() {
  if (active_ == 0) throw std::logic_error("departure from an idle link");
  Key top = heap_.front();
  std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
  heap_.pop_back();
  Departure d;
  d.time = last_ + std::max(0.0, top.vfinish - virtual_) * static_cast<double>(active_);
  virtual_ = top.vfinish;
  last_ = d.time;
  EntitySlot& s = store_[top.slot];
  d.flow = s.entity.segments[s.next].flow;
  d.entity = s.entity.id;
  ++s.next;
  if (s.next < s.entity.segments.size()) {
    heap_.push_back({top.vfinish + s.entity.segments[s.next].size, top.id, top.slot});
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
    return d;
  }
  d.entity_done = true;
  store_.release(top.slot);
  if (--active_ == 0) virtual_ = 0.0;
  return d;
}

double PsServer::work_in_system(double now) const {
  if (active_ == 0) return 0.0;
  double v_now = virtual_ + (now - last_) / static_cast<double>(active_);
  double w = 0.0;
  for (const auto& k : heap_) w += store_[k.slot].v_end - v_now;
  return w;
}

std::vector<std::pair<std::uint64_t, double>> PsServer::rates(double) const {
  std::vector<std::pair<std::uint64_t, double>> out;
  for (const auto& k : heap_) out.emplace_back(k.id, 1.0 / static_cast<double>(active_));
  return out;
}

}  // namespace qsched::flowsim
