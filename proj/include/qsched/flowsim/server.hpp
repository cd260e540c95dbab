#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "qsched/flowsim/discipline.hpp"

namespace qsched::flowsim {

// One flow inside a scheduling entity. `flow` is an opaque handle owned by
// the caller.
struct Segment {
  std::uint32_t flow = 0;
  double size = 0.0;
};

// Unit scheduled by the link: a single flow, or a whole batch whose flows
// are served one after another in the given segment order.
struct Entity {
  std::uint64_t id = 0;  // arrival order; ties are broken FIFO on it
  std::vector<Segment> segments;
};

struct Departure {
  double time = 0.0;
  std::uint32_t flow = 0;
  std::uint64_t entity = 0;
  bool entity_done = false;
};

// Unit-capacity link. Between calls the state evolves deterministically;
// next_departure() is the instant the next segment completes if nothing
// else arrives before it.
class Server {
 public:
  virtual ~Server() = default;

  virtual void admit(Entity entity, double now) = 0;
  virtual double next_departure() const = 0;
  // Completes the segment due at next_departure().
  virtual Departure depart() = 0;

  virtual std::size_t active() const = 0;
  virtual double work_in_system(double now) const = 0;
  // Instantaneous service rate of every active entity.
  virtual std::vector<std::pair<std::uint64_t, double>> rates(double now) const = 0;
};

std::unique_ptr<Server> make_server(Policy policy);

// Entity slots recycled through a free list so segment vectors keep their
// capacity.
struct EntitySlot {
  Entity entity;
  std::size_t next = 0;   // segment in service
  double seg_rem = 0.0;   // remaining work of that segment
  double rest = 0.0;      // total size of later segments
  double v_end = 0.0;     // PS: virtual finish of the whole entity
};

class SlotStore {
 public:
  std::uint32_t put(Entity e);
  EntitySlot& operator[](std::uint32_t i) { return slots_[i]; }
  const EntitySlot& operator[](std::uint32_t i) const { return slots_[i]; }
  void release(std::uint32_t i);

 private:
  std::vector<EntitySlot> slots_;
  std::vector<std::uint32_t> free_;
};

// SRPT (key = remaining work) or PSJF (key = original size); the entity with
// the smallest key is served at rate 1, preemptively.
class PriorityServer final : public Server {
 public:
  explicit PriorityServer(bool by_remaining) : by_remaining_(by_remaining) {}

  void admit(Entity entity, double now) override;
  double next_departure() const override;
  Departure depart() override;
  std::size_t active() const override { return waiting_.size() + (has_head_ ? 1 : 0); }
  double work_in_system(double now) const override;
  std::vector<std::pair<std::uint64_t, double>> rates(double now) const override;

 private:
  struct Key {
    double key;
    std::uint64_t id;
    std::uint32_t slot;
    bool operator>(const Key& o) const {
      return key != o.key ? key > o.key : id > o.id;
    }
  };

  double key_of(const EntitySlot& s, double live_seg_rem) const;
  void start_head(std::uint32_t slot, double now);

  bool by_remaining_;
  SlotStore store_;
  std::vector<Key> waiting_;  // min-heap
  bool has_head_ = false;
  std::uint32_t head_ = 0;
  double head_start_ = 0.0;
};

// Processor sharing between entities, tracked through a virtual clock that
// advances at rate 1/n; every active entity has attained the same service
// since its arrival epoch on that clock.
class PsServer final : public Server {
 public:
  void admit(Entity entity, double now) override;
  double next_departure() const override;
  Departure depart() override;
  std::size_t active() const override { return active_; }
  double work_in_system(double now) const override;
  std::vector<std::pair<std::uint64_t, double>> rates(double now) const override;

 private:
  struct Key {
    double vfinish;
    std::uint64_t id;
    std::uint32_t slot;
    bool operator>(const Key& o) const {
      return vfinish != o.vfinish ? vfinish > o.vfinish : id > o.id;
    }
  };

  void advance(double now);

  SlotStore store_;
  std::vector<Key> heap_;  // min-heap
  std::size_t active_ = 0;
  double virtual_ = 0.0;
  double last_ = 0.0;
  double sum_v_end_ = 0.0;
};

}  // namespace qsched::flowsim
