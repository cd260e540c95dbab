#include "qsched/flowsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qsched/flowsim/server.hpp"
#include "qsched/rng.hpp"

namespace qsched::flowsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

enum class Ev : std::uint8_t { batch_arrival, burst_arrival, next_flow, trace_batch };

struct CalendarEntry {
  double time;
  std::uint64_t seq;
  Ev kind;
  int cls;
  std::uint32_t source;

  bool operator>(const CalendarEntry& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

struct FlowRec {
  std::uint64_t index = 0;
  double arrival = 0.0;
  double size = 0.0;
  std::uint32_t batch = 0;
  std::uint32_t source = kNone;
  int cls = 0;
  bool tagged = false;
};

struct BatchRec {
  std::uint64_t ordinal = 0;
  double arrival = 0.0;
  double total = 0.0;
  std::uint32_t pending = 0;
  std::uint64_t first_index = 0;
  int cls = 0;
  bool tagged = false;
};

template <class T>
class Pool {
 public:
  std::uint32_t acquire() {
    if (!free_.empty()) {
      std::uint32_t i = free_.back();
      free_.pop_back();
      return i;
    }
    items_.emplace_back();
    return static_cast<std::uint32_t>(items_.size() - 1);
  }
  void release(std::uint32_t i) { free_.push_back(i); }
  T& operator[](std::uint32_t i) { return items_[i]; }

 private:
  std::vector<T> items_;
  std::vector<std::uint32_t> free_;
};

struct ClassState {
  ClassSpec spec;
  double rate = 0.0;  // batch or burst arrivals per unit time
  Rng arrivals{0};
  Rng widths{0};
  Rng sizes{0};
  Rng thinks{0};
};

class Simulation {
 public:
  Simulation(const TrafficSpec& spec, const Discipline& disc, const SimOptions& opts)
      : spec_(spec), disc_(disc), opts_(opts), server_(make_server(disc.policy)) {
    validate(disc_);
    if (opts_.bins < 1) throw std::invalid_argument("need at least one bin");
    if (!(opts_.warmup_fraction >= 0.0 && opts_.warmup_fraction < 1.0)) {
      throw std::invalid_argument("warm-up fraction must be in [0, 1)");
    }
    horizon_ = opts_.horizon;
    warm_ = static_cast<std::uint64_t>(std::floor(opts_.warmup_fraction * horizon_));
    if (horizon_ <= warm_) throw std::invalid_argument("horizon too small");
    bins_.assign(std::max<std::size_t>(1, spec_.classes.size()),
                 std::vector<Bin>(opts_.bins));
  }

  void start_traffic() {
    validate(spec_);
    if (spec_.model == Model::closed) spec_ = resolve_closed(spec_);
    const auto& cs = spec_.classes;
    for (std::size_t c = 0; c < cs.size(); ++c) {
      ClassState st;
      st.spec = cs[c];
      st.arrivals = Rng(derive_seed(opts_.seed, 16 * c + 0));
      st.widths = Rng(derive_seed(opts_.seed, 16 * c + 1));
      st.sizes = Rng(derive_seed(opts_.seed, 16 * c + 2));
      st.thinks = Rng(derive_seed(opts_.seed, 16 * c + 3));
      if (spec_.model != Model::closed) {
        st.rate = cs[c].share * spec_.load /
                  (cs[c].width.emitted_mean() * cs[c].size.mean());
      }
      classes_.push_back(std::move(st));
    }
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      auto& st = classes_[c];
      int cls = static_cast<int>(c);
      switch (spec_.model) {
        case Model::open_batch:
          schedule(st.arrivals.exponential(1.0 / st.rate), Ev::batch_arrival, cls, kNone);
          break;
        case Model::partly_open:
          schedule(st.arrivals.exponential(1.0 / st.rate), Ev::burst_arrival, cls, kNone);
          break;
        case Model::closed:
          for (int k = 0; k < st.spec.clients; ++k) {
            schedule(st.spec.think.sample(st.thinks), Ev::next_flow, cls, kNone);
          }
          break;
      }
    }
  }

  void load_trace(std::span<const TraceFlow> trace) {
    std::size_t i = 0;
    int max_cls = 0;
    while (i < trace.size()) {
      std::size_t j = i;
      std::vector<double> sizes;
      while (j < trace.size() && trace[j].batch == trace[i].batch) {
        sizes.push_back(trace[j].size);
        max_cls = std::max(max_cls, trace[j].cls);
        ++j;
      }
      trace_batches_.push_back(std::move(sizes));
      schedule(trace[i].time, Ev::trace_batch, trace[i].cls,
               static_cast<std::uint32_t>(trace_batches_.size() - 1));
      i = j;
    }
    bins_.assign(max_cls + 1, std::vector<Bin>(opts_.bins));
    trace_mode_ = true;
  }

  void run() {
    for (;;) {
      if (trace_mode_) {
        if (calendar_.empty() && server_->active() == 0) break;
      } else if (next_index_ >= horizon_ && pending_flows_ == 0 && pending_batches_ == 0) {
        break;
      }
      double t_ext = calendar_.empty() ? kInf : calendar_.front().time;
      double t_dep = server_->next_departure();
      double t = std::min(t_ext, t_dep);
      if (t == kInf) throw std::logic_error("simulation stalled with pending flows");
      if (t < now_ - 1e-9 * std::max(1.0, std::abs(now_))) {
        std::ostringstream os;
        os << std::setprecision(17) << "event calendar out of order: next event at "
           << t << " before current time " << now_;
        throw std::logic_error(os.str());
      }
      advance_to(std::max(t, now_));
      if (t_dep <= t_ext) {
        on_departure();
      } else {
        CalendarEntry e = calendar_.front();
        std::pop_heap(calendar_.begin(), calendar_.end(), std::greater<>{});
        calendar_.pop_back();
        on_external(e);
      }
      if (opts_.check_conservation) check_conservation();
    }
  }

  SimReport report() {
    SimReport r;
    r.discipline = disc_.name();
    r.seeds = {opts_.seed};
    r.bins = bins_;
    r.occupancy_time = occupancy_;
    r.busy_time = busy_observed_;
    r.observed_time = observed_;
    r.arrivals = arrivals_;
    r.completions = completions_;
    r.in_flight = arrivals_ - completions_;
    r.work_arrived = work_arrived_;
    r.work_served = work_served_;
    r.work_in_system = server_->work_in_system(now_);
    finalize(r);
    return r;
  }

  TraceResult& trace_result() { return trace_result_; }

  void set_log(std::function<void(const LogEvent&)> log) { opts_.log = std::move(log); }

 private:
  void schedule(double time, Ev kind, int cls, std::uint32_t source) {
    calendar_.push_back({time, seq_++, kind, cls, source});
    std::push_heap(calendar_.begin(), calendar_.end(), std::greater<>{});
  }

  void advance_to(double t) {
    double dt = t - now_;
    if (dt > 0.0) {
      std::size_t n = server_->active();
      if (n > 0) work_served_ += dt;
      if (observing_) {
        if (occupancy_.size() <= n) occupancy_.resize(n + 1, 0.0);
        occupancy_[n] += dt;
        observed_ += dt;
        if (n > 0) busy_observed_ += dt;
      }
    }
    now_ = t;
  }

  void on_external(const CalendarEntry& e) {
    auto& st = classes_.empty() ? dummy_ : classes_[e.cls];
    switch (e.kind) {
      case Ev::batch_arrival: {
        long width = st.spec.width.sample(st.widths);
        sizes_.clear();
        for (long k = 0; k < width; ++k) sizes_.push_back(st.spec.size.sample(st.sizes));
        admit(e.cls, sizes_, kNone);
        schedule(now_ + st.arrivals.exponential(1.0 / st.rate), Ev::batch_arrival, e.cls, kNone);
        break;
      }
      case Ev::burst_arrival: {
        std::uint32_t b = bursts_.acquire();
        bursts_[b] = st.spec.width.sample(st.widths);
        sizes_.assign(1, st.spec.size.sample(st.sizes));
        admit(e.cls, sizes_, b);
        schedule(now_ + st.arrivals.exponential(1.0 / st.rate), Ev::burst_arrival, e.cls, kNone);
        break;
      }
      case Ev::next_flow:
        sizes_.assign(1, st.spec.size.sample(st.sizes));
        admit(e.cls, sizes_, e.source);
        break;
      case Ev::trace_batch:
        admit(e.cls, trace_batches_[e.source], kNone);
        break;
    }
  }

  void admit(int cls, const std::vector<double>& sizes, std::uint32_t source) {
    std::uint32_t b = batches_.acquire();
    BatchRec& br = batches_[b];
    br.ordinal = batch_ordinal_++;
    br.arrival = now_;
    br.total = 0.0;
    br.pending = static_cast<std::uint32_t>(sizes.size());
    br.first_index = next_index_;
    br.cls = cls;
    std::uint64_t last_index = next_index_ + sizes.size() - 1;
    br.tagged = br.first_index >= warm_ && last_index < horizon_;
    if (br.tagged) ++pending_batches_;
    if (trace_mode_) {
      trace_result_.batch_arrival.push_back(now_);
      trace_result_.batch_completion.push_back(kInf);
    }

    Entity batch_entity;
    batch_entity.id = next_index_;
    for (double size : sizes) {
      std::uint64_t index = next_index_++;
      if (index == warm_) observing_ = true;
      if (index == horizon_) observing_ = false;
      std::uint32_t f = flows_.acquire();
      FlowRec& fr = flows_[f];
      fr.index = index;
      fr.arrival = now_;
      fr.size = size;
      fr.batch = b;
      fr.source = source;
      fr.cls = cls;
      fr.tagged = index >= warm_ && index < horizon_;
      if (fr.tagged) ++pending_flows_;
      br.total += size;
      work_arrived_ += size;
      ++arrivals_;
      if (disc_.granularity == Granularity::per_flow) {
        Entity e;
        e.id = index;
        e.segments.push_back({f, size});
        server_->admit(std::move(e), now_);
      } else {
        batch_entity.segments.push_back({f, size});
      }
      if (opts_.log) {
        opts_.log({now_, EventKind::arrival, index, cls, work_arrived_ - work_served_});
      }
    }
    if (disc_.granularity == Granularity::per_batch) {
      std::stable_sort(batch_entity.segments.begin(), batch_entity.segments.end(),
                       [](const Segment& a, const Segment& b) { return a.size < b.size; });
      server_->admit(std::move(batch_entity), now_);
    }
  }

  std::size_t bin_of(std::uint64_t index) const {
    std::uint64_t span = horizon_ - warm_;
    std::uint64_t k = (index - warm_) * static_cast<std::uint64_t>(opts_.bins) / span;
    return static_cast<std::size_t>(std::min<std::uint64_t>(k, opts_.bins - 1));
  }

  void on_departure() {
    Departure d = server_->depart();
    FlowRec& fr = flows_[d.flow];
    ++completions_;
    if (opts_.log) {
      opts_.log({now_, EventKind::departure, fr.index, fr.cls, work_arrived_ - work_served_});
    }
    if (fr.tagged) {
      Bin& bin = bins_[fr.cls][bin_of(fr.index)];
      bin.fct_sum += now_ - fr.arrival;
      bin.size_sum += fr.size;
      bin.flows += 1.0;
      --pending_flows_;
    }
    if (trace_mode_) trace_result_.departures.push_back({fr.index, now_});
    BatchRec& br = batches_[fr.batch];
    if (--br.pending == 0) {
      if (br.tagged) {
        Bin& bin = bins_[br.cls][bin_of(br.first_index)];
        bin.bct_sum += now_ - br.arrival;
        bin.bsize_sum += br.total;
        bin.batches += 1.0;
        --pending_batches_;
      }
      if (trace_mode_) trace_result_.batch_completion[br.ordinal] = now_;
      batches_.release(fr.batch);
    }
    if (!trace_mode_) follow_up(fr);
    flows_.release(d.flow);
  }

  void follow_up(const FlowRec& fr) {
    auto& st = classes_[fr.cls];
    if (spec_.model == Model::partly_open) {
      if (--bursts_[fr.source] > 0) {
        schedule(now_ + st.spec.think.sample(st.thinks), Ev::next_flow, fr.cls, fr.source);
      } else {
        bursts_.release(fr.source);
      }
    } else if (spec_.model == Model::closed) {
      schedule(now_ + st.spec.think.sample(st.thinks), Ev::next_flow, fr.cls, kNone);
    }
  }

  void check_conservation() const {
    double in_system = server_->work_in_system(now_);
    double expected = work_arrived_ - work_served_;
    double tol = 1e-9 * std::max(1.0, work_arrived_);
    if (std::abs(in_system - expected) > tol) {
      std::ostringstream os;
      os << std::setprecision(17) << "work conservation violated at t=" << now_
         << ": in system " << in_system << ", arrived - served " << expected;
      throw std::logic_error(os.str());
    }
    // Heavy-tailed sizes can leave a busy link with less than tol of work.
    bool busy = server_->active() > 0;
    if ((busy && !(in_system > 0.0)) || (!busy && in_system > tol)) {
      throw std::logic_error("link busy state disagrees with work in system");
    }
  }

  TrafficSpec spec_;
  Discipline disc_;
  SimOptions opts_;
  std::unique_ptr<Server> server_;
  std::vector<ClassState> classes_;
  ClassState dummy_;
  std::vector<CalendarEntry> calendar_;  // min-heap
  std::uint64_t seq_ = 0;

  Pool<FlowRec> flows_;
  Pool<BatchRec> batches_;
  Pool<long> bursts_;
  std::vector<double> sizes_;

  std::uint64_t horizon_ = 0;
  std::uint64_t warm_ = 0;
  std::uint64_t next_index_ = 0;
  std::uint64_t batch_ordinal_ = 0;
  std::uint64_t pending_flows_ = 0;
  std::uint64_t pending_batches_ = 0;

  double now_ = 0.0;
  bool observing_ = false;
  std::vector<double> occupancy_;
  double observed_ = 0.0;
  double busy_observed_ = 0.0;
  std::vector<std::vector<Bin>> bins_;

  std::uint64_t arrivals_ = 0;
  std::uint64_t completions_ = 0;
  double work_arrived_ = 0.0;
  double work_served_ = 0.0;

  bool trace_mode_ = false;
  std::vector<std::vector<double>> trace_batches_;
  TraceResult trace_result_;
};

}  // namespace

void write_log_header(std::ostream& os) {
  os << "time,event-kind,entity-id,class,remaining-work\n";
}

void write_log_event(std::ostream& os, const LogEvent& e) {
  os << std::setprecision(10) << e.time << ','
     << (e.kind == EventKind::arrival ? "arrival" : "departure") << ',' << e.flow
     << ',' << e.cls << ',' << e.remaining_work << '\n';
}

SimReport run(const TrafficSpec& spec, const Discipline& disc, const SimOptions& opts) {
  Simulation sim(spec, disc, opts);
  sim.start_traffic();
  sim.run();
  return sim.report();
}

SimReport run_replicated(const TrafficSpec& spec, const Discipline& disc,
                         const SimOptions& opts, int replications) {
  if (replications < 1) throw std::invalid_argument("need at least one replication");
  std::vector<SimReport> parts;
  for (int r = 0; r < replications; ++r) {
    SimOptions o = opts;
    o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(r));
    parts.push_back(run(spec, disc, o));
  }
  return merge(parts);
}

TraceResult replay(std::span<const TraceFlow> trace, const Discipline& disc,
                   const std::function<void(const LogEvent&)>& log) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].time < trace[i - 1].time) {
      throw std::invalid_argument("trace times must be nondecreasing");
    }
  }
  SimOptions opts;
  opts.horizon = std::max<std::uint64_t>(1, trace.size());
  opts.warmup_fraction = 0.0;
  opts.bins = 1;
  opts.log = log;
  Simulation sim(TrafficSpec{}, disc, opts);
  sim.load_trace(trace);
  sim.run();
  return std::move(sim.trace_result());
}

}  // namespace qsched::flowsim
