#include "qsched/vfs_harness.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>

#include "qsched/rng.hpp"

namespace qsched::vfs {

namespace {

struct Emission {
  double time;
  std::uint64_t flow;
  bool operator>(const Emission& o) const {
    return time != o.time ? time > o.time : flow > o.flow;
  }
};

struct LargeFlow {
  double arrival = 0.0;
  double next = 0.0;
  std::uint64_t index = 0;
  std::uint64_t id = 0;
  int accepted = 0;
};

}  // namespace

VfsReport run_fig6(const Fig6Options& o) {
  if (!(o.load > 0.0 && o.load < 1.0)) throw std::invalid_argument("VFS load must be in (0, 1)");
  if (o.packets_per_flow < 1) throw std::invalid_argument("packets per flow must be >= 1");
  if (!(o.large_share > 0.0 && o.large_share <= 1.0)) {
    throw std::invalid_argument("large-flow share must be in (0, 1]");
  }
  const double slot = o.packet_bytes / o.vfs.capacity;
  const double flow_time = o.packets_per_flow * slot;
  const double large_rate = o.large_share * o.load / flow_time;
  const double single_rate = (1.0 - o.large_share) * o.load / slot;
  const std::uint64_t horizon = o.large_flows;
  const auto warm = static_cast<std::uint64_t>(o.warmup_fraction * horizon);
  if (horizon <= warm) throw std::invalid_argument("large-flow horizon too small");

  Rng large_rng(derive_seed(o.seed, 1));
  Rng single_rng(derive_seed(o.seed, 2));
  VfsState vfs(o.vfs);

  // Every large flow re-offers exactly one slot after its previous packet,
  // so pending emissions stay sorted in FIFO order.
  std::deque<LargeFlow> emitting;
  std::uint64_t next_id = 0;
  std::uint64_t large_index = 0;
  double next_large = large_rng.exponential(1.0 / large_rate);
  double next_single = single_rate > 0.0 ? single_rng.exponential(1.0 / single_rate)
                                         : std::numeric_limits<double>::infinity();

  std::vector<double> occupancy;  // counts of |A| seen by arriving flows
  bool sampling = false;
  std::uint64_t pending = 0;
  std::uint64_t offered = 0, dropped = 0;
  std::vector<double> bin_sum(o.bins, 0.0), bin_n(o.bins, 0.0);

  auto sample_active = [&] {
    if (!sampling) return;
    std::size_t n = vfs.active_count();
    if (occupancy.size() <= n) occupancy.resize(n + 1, 0.0);
    occupancy[n] += 1.0;
  };
  auto offer = [&](double t, std::uint64_t flow) {
    ++offered;
    Verdict v = vfs.on_arrival({t, flow, o.packet_bytes});
    vfs.decrement_epoch();
    if (o.check_invariants) vfs.check_invariants(o.packet_bytes);
    if (v == Verdict::drop) ++dropped;
    return v;
  };
  // Offers the flow's packet at time t; returns true once it is done.
  auto emit = [&](LargeFlow& lf, double t) {
    if (offer(t, lf.id) == Verdict::drop || ++lf.accepted < o.packets_per_flow) return false;
    if (lf.index >= warm && lf.index < horizon) {
      double fct = t + slot - lf.arrival;
      auto b = static_cast<std::size_t>((lf.index - warm) * o.bins / (horizon - warm));
      bin_sum[b] += fct / flow_time;
      bin_n[b] += 1.0;
      --pending;
    }
    return true;
  };

  while (large_index < horizon || pending > 0) {
    double t_emit = emitting.empty() ? std::numeric_limits<double>::infinity()
                                     : emitting.front().next;
    double t = std::min({t_emit, next_large, next_single});
    if (t == t_emit) {
      LargeFlow lf = emitting.front();
      emitting.pop_front();
      if (!emit(lf, t)) {
        lf.next = t + slot;
        emitting.push_back(lf);
      }
    } else if (t == next_large) {
      if (large_index == warm) sampling = true;
      if (large_index == horizon) sampling = false;
      sample_active();
      LargeFlow lf{t, t + slot, large_index, next_id++, 0};
      if (large_index >= warm && large_index < horizon) ++pending;
      ++large_index;
      if (!emit(lf, t)) emitting.push_back(lf);
      next_large = t + large_rng.exponential(1.0 / large_rate);
    } else {
      sample_active();
      offer(t, next_id++);
      next_single = t + single_rng.exponential(1.0 / single_rate);
    }
  }

  VfsReport r;
  r.load = o.load;
  r.theta = o.vfs.theta;
  r.seed = o.seed;
  std::vector<double> means(o.bins);
  double total = 0.0, n = 0.0;
  for (int b = 0; b < o.bins; ++b) {
    means[b] = bin_n[b] > 0.0 ? bin_sum[b] / bin_n[b] : std::numeric_limits<double>::quiet_NaN();
    total += bin_sum[b];
    n += bin_n[b];
  }
  r.norm_fct = flowsim::batch_means(means, total / n);
  r.large_completed = static_cast<std::uint64_t>(n);
  r.p999_active = flowsim::histogram_percentile(occupancy, 99.9);
  double cnt = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < occupancy.size(); ++k) {
    cnt += occupancy[k];
    sum += static_cast<double>(k) * occupancy[k];
  }
  r.mean_active = cnt > 0.0 ? sum / cnt : 0.0;
  r.drop_rate = offered > 0 ? static_cast<double>(dropped) / static_cast<double>(offered) : 0.0;
  return r;
}

BackloggedReport run_backlogged(const BackloggedOptions& o) {
  if (o.flows < 1) throw std::invalid_argument("need at least one backlogged flow");
  const double slot = o.packet_bytes / o.vfs.capacity;
  Rng rng(derive_seed(o.seed, 7));
  VfsState vfs(o.vfs);
  std::vector<Emission> heap;
  for (int f = 0; f < o.flows; ++f) heap.push_back({rng.uniform() * slot, static_cast<std::uint64_t>(f)});
  std::make_heap(heap.begin(), heap.end(), std::greater<>{});

  BackloggedReport r;
  r.accepted.assign(o.flows, 0.0);
  r.drained.assign(o.flows, 0.0);
  r.min_credit = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < o.packets; ++k) {
    Emission e = heap.front();
    std::pop_heap(heap.begin(), heap.end(), std::greater<>{});
    heap.pop_back();
    if (vfs.on_arrival({e.time, e.flow, o.packet_bytes}) == Verdict::accept) {
      r.accepted[e.flow] += o.packet_bytes;
    }
    if (o.check_invariants) vfs.check_invariants(o.packet_bytes);
    if (auto d = vfs.decrement_epoch()) r.drained[d->flow] += d->amount;
    if (o.check_invariants) vfs.check_invariants(o.packet_bytes);
    r.min_credit = std::min(r.min_credit, vfs.credit());
    if (auto v = vfs.vq(e.flow)) r.max_vq = std::max(r.max_vq, *v);
    heap.push_back({e.time + (o.periodic ? slot : rng.exponential(slot)), e.flow});
    std::push_heap(heap.begin(), heap.end(), std::greater<>{});
  }
  auto spread = [](const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    return mean > 0.0 ? (*hi - *lo) / mean : 0.0;
  };
  r.accepted_spread = spread(r.accepted);
  r.drained_spread = spread(r.drained);
  return r;
}

}  // namespace qsched::vfs
