#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "qsched/analysis.hpp"
#include "qsched/flowsim/server.hpp"
#include "qsched/flowsim/simulator.hpp"

using namespace qsched;
using namespace qsched::flowsim;

namespace {

const Discipline kFlowSrpt{Granularity::per_flow, Policy::srpt};
const Discipline kFlowPsjf{Granularity::per_flow, Policy::psjf};
const Discipline kFlowPs{Granularity::per_flow, Policy::ps};
const Discipline kBatchSrpt{Granularity::per_batch, Policy::srpt};
const Discipline kBatchPs{Granularity::per_batch, Policy::ps};
const Discipline kAll[] = {kFlowSrpt, kFlowPsjf, kFlowPs, kBatchSrpt, kBatchPs};

TrafficSpec single_class(Model model, Distribution size, BatchWidthLaw width, double load,
                         Distribution think = Distribution::exponential(1.0)) {
  TrafficSpec t;
  t.model = model;
  ClassSpec c;
  c.size = size;
  c.width = width;
  c.think = think;
  t.classes = {c};
  t.load = load;
  return t;
}

Entity flow_entity(std::uint64_t id, std::uint32_t flow, double size) {
  return Entity{id, {Segment{flow, size}}};
}

// Random trace of batches with integer sizes drawn from {1, 2, 3}.
std::vector<TraceFlow> random_trace(std::uint64_t seed, int batches, double rate, bool equal_sizes) {
  Rng rng(seed);
  std::vector<TraceFlow> trace;
  double t = 0.0;
  for (int b = 0; b < batches; ++b) {
    t += rng.exponential(1.0 / rate);
    int width = 1 + static_cast<int>(rng.uniform() * 4);
    for (int k = 0; k < width; ++k) {
      double size = equal_sizes ? 1.0 : 1.0 + std::floor(rng.uniform() * 3.0);
      trace.push_back({t, static_cast<std::uint64_t>(b), size, 0});
    }
  }
  return trace;
}

}  // namespace

TEST_CASE("discipline names round trip") {
  for (const auto& d : kAll) CHECK(Discipline::parse(d.name()) == d);
  CHECK(kFlowSrpt.name() == "per-flow-srpt");
  CHECK(kBatchPs.name() == "per-batch-ps");
  CHECK_THROWS_AS(Discipline::parse("per-batch-psjf"), std::invalid_argument);
  CHECK_THROWS_AS(Discipline::parse("fifo"), std::invalid_argument);
  CHECK_THROWS_AS(validate(Discipline{Granularity::per_batch, Policy::psjf}), std::invalid_argument);
  for (auto m : {Model::open_batch, Model::partly_open, Model::closed}) {
    CHECK(parse_model(to_string(m)) == m);
  }
}

TEST_CASE("traffic validation") {
  auto ok = single_class(Model::open_batch, Distribution::exponential(1.0), BatchWidthLaw::deterministic(1), 0.5);
  CHECK_NOTHROW(validate(ok));
  auto unstable = ok;
  unstable.load = 1.0;
  CHECK_THROWS_AS(validate(unstable), std::invalid_argument);
  CHECK_THROWS_AS(run(unstable, kFlowPs, SimOptions{}), std::invalid_argument);

  auto shares = ok;
  shares.classes.push_back(shares.classes[0]);
  CHECK_THROWS_AS(validate(shares), std::invalid_argument);
  shares.classes[0].share = 0.3;
  shares.classes[1].share = 0.7;
  CHECK_NOTHROW(validate(shares));

  auto closed = ok;
  closed.model = Model::closed;
  closed.classes[0].clients = 0;
  CHECK_THROWS_AS(validate(closed), std::invalid_argument);
}

TEST_CASE("SRPT serves the smallest remaining work") {
  auto s = make_server(Policy::srpt);
  s->admit(flow_entity(0, 0, 5.0), 0.0);
  s->admit(flow_entity(1, 1, 3.0), 0.0);
  auto rates = s->rates(0.0);
  std::sort(rates.begin(), rates.end());
  REQUIRE(rates.size() == 2);
  CHECK(rates[0].second == 0.0);  // entity 0, remaining 5
  CHECK(rates[1].second == 1.0);  // entity 1, remaining 3
  CHECK(s->next_departure() == 3.0);
  auto d = s->depart();
  CHECK(d.flow == 1);
  CHECK(d.entity_done);
  CHECK(s->next_departure() == 8.0);
}

TEST_CASE("SRPT preempts on a strictly smaller arrival, FIFO on ties") {
  auto s = make_server(Policy::srpt);
  s->admit(flow_entity(0, 0, 4.0), 0.0);
  s->admit(flow_entity(1, 1, 3.0), 1.0);  // equal to live remaining 3: no preemption
  CHECK(s->next_departure() == 4.0);
  s->admit(flow_entity(2, 2, 1.0), 2.0);  // preempts
  CHECK(s->next_departure() == 3.0);
  CHECK(s->depart().flow == 2);
  CHECK(s->depart().flow == 0);
  CHECK(s->depart().flow == 1);
}

TEST_CASE("PSJF keys on original size") {
  auto s = make_server(Policy::psjf);
  s->admit(flow_entity(0, 0, 4.0), 0.0);
  s->admit(flow_entity(1, 1, 3.0), 3.5);  // remaining 0.5 of flow 0, but 4 > 3
  CHECK(s->depart().flow == 1);
  CHECK(s->depart().flow == 0);
}

TEST_CASE("per-batch PS shares equally between batches") {
  auto s = make_server(Policy::ps);
  s->admit(Entity{0, {Segment{0, 1.0}, Segment{1, 1.0}, Segment{2, 1.0}}}, 0.0);
  s->admit(Entity{1, {Segment{3, 2.0}}}, 0.0);
  for (const auto& [id, rate] : s->rates(0.0)) CHECK(rate == doctest::Approx(0.5));
  CHECK(s->work_in_system(0.0) == doctest::Approx(5.0));
  CHECK(s->work_in_system(1.0) == doctest::Approx(4.0));
}

TEST_CASE("single batch completes after its total size") {
  std::vector<TraceFlow> trace = {{0.0, 0, 0.5, 0}, {0.0, 0, 2.0, 0}, {0.0, 0, 1.25, 0}};
  for (const auto& d : kAll) {
    auto r = replay(trace, d);
    REQUIRE(r.batch_completion.size() == 1);
    CHECK(r.batch_completion[0] == doctest::Approx(3.75).epsilon(1e-14));
    CHECK(r.departures.size() == 3);
  }
  // Per-flow PS: the smallest flow finishes first at 3 * 0.5.
  auto ps = replay(trace, kFlowPs);
  CHECK(ps.departures[0].flow == 0);
  CHECK(ps.departures[0].time == doctest::Approx(1.5));
}

TEST_CASE("deterministic sizes: SRPT departures equal FCFS") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto trace = random_trace(seed, 2000, 0.22, true);
    // FCFS by hand: d_i = max(a_i, d_{i-1}) + s_i in trace order.
    std::vector<TraceDeparture> fcfs;
    double last = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      last = std::max(trace[i].time, last) + trace[i].size;
      fcfs.push_back({i, last});
    }
    auto r = replay(trace, kFlowSrpt);
    REQUIRE(r.departures.size() == fcfs.size());
    for (std::size_t i = 0; i < fcfs.size(); ++i) {
      CHECK(r.departures[i].flow == fcfs[i].flow);
      CHECK(r.departures[i].time == fcfs[i].time);
    }
  }
}

TEST_CASE("replay logs conserve work") {
  auto trace = random_trace(9, 500, 0.2, false);
  double total = 0.0;
  for (const auto& f : trace) total += f.size;
  for (const auto& d : kAll) {
    double arrived = 0.0, last_rem = 0.0;
    std::size_t arrivals = 0, departures = 0;
    auto log = [&](const LogEvent& e) {
      if (e.kind == EventKind::arrival) {
        ++arrivals;
        arrived += trace[e.flow].size;
      } else {
        ++departures;
      }
      last_rem = e.remaining_work;
    };
    auto r = replay(trace, d, log);
    CHECK(arrivals == trace.size());
    CHECK(departures == trace.size());
    CHECK(arrived == doctest::Approx(total));
    CHECK(last_rem == doctest::Approx(0.0).epsilon(1e-9));
    // Busy periods are identical for every work-conserving discipline.
    CHECK(r.departures.back().time == doctest::Approx(replay(trace, kFlowPs).departures.back().time));
  }
}

TEST_CASE("event log export format") {
  std::ostringstream os;
  write_log_header(os);
  write_log_event(os, LogEvent{1.5, EventKind::departure, 7, 1, 2.25});
  CHECK(os.str() == "time,event-kind,entity-id,class,remaining-work\n1.5,departure,7,1,2.25\n");
}

TEST_CASE("conservation holds in every model and discipline") {
  std::vector<TrafficSpec> specs = {
      single_class(Model::open_batch, Distribution::weibull(0.4), BatchWidthLaw::geometric_from_1(10.0), 0.7),
      single_class(Model::open_batch, Distribution::exponential(1.0), BatchWidthLaw::geometric_from_0(3.0), 0.6),
      single_class(Model::partly_open, Distribution::deterministic(1.0), BatchWidthLaw::hyper_geometric(5.0, 10.0), 0.8),
  };
  TrafficSpec closed = single_class(Model::closed, Distribution::weibull(3.5), BatchWidthLaw::deterministic(1), 0.9);
  closed.classes[0].clients = 20;
  specs.push_back(resolve_closed(closed));
  for (const auto& spec : specs) {
    for (const auto& d : kAll) {
      if (spec.model != Model::open_batch && d.granularity == Granularity::per_batch) continue;
      INFO(to_string(spec.model), " ", d.name());
      SimOptions o;
      o.horizon = 20000;
      o.seed = 5;
      o.check_conservation = true;
      SimReport r;
      CHECK_NOTHROW(r = run(spec, d, o));
      CHECK(r.arrivals == r.completions + r.in_flight);
      CHECK(r.work_arrived == doctest::Approx(r.work_served + r.work_in_system).epsilon(1e-9));
      CHECK(r.overall.fct.half_width > 0.0);
      CHECK(r.overall.flows == 16000);
    }
  }
}

TEST_CASE("identical seeds give identical reports and logs") {
  auto spec = single_class(Model::partly_open, Distribution::weibull(0.4), BatchWidthLaw::deterministic(5), 0.7);
  SimOptions o;
  o.horizon = 50000;
  o.seed = 42;
  std::ostringstream log_a, log_b;
  o.log = [&](const LogEvent& e) { write_log_event(log_a, e); };
  auto a = run(spec, kFlowSrpt, o);
  o.log = [&](const LogEvent& e) { write_log_event(log_b, e); };
  auto b = run(spec, kFlowSrpt, o);
  CHECK(log_a.str() == log_b.str());
  CHECK(a.overall.fct.mean == b.overall.fct.mean);
  CHECK(a.overall.fct.half_width == b.overall.fct.half_width);
  CHECK(a.p999_active == b.p999_active);
  o.log = {};
  o.seed = 43;
  CHECK(run(spec, kFlowSrpt, o).overall.fct.mean != a.overall.fct.mean);
}

TEST_CASE("PS is insensitive to size, burst and think laws") {
  struct Case {
    Distribution size;
    BatchWidthLaw burst;
    Distribution think;
  };
  std::vector<Case> cases = {
      {Distribution::exponential(1.0), BatchWidthLaw::deterministic(1), Distribution::exponential(1.0)},
      {Distribution::deterministic(1.0), BatchWidthLaw::deterministic(5), Distribution::exponential(1.0)},
      {Distribution::weibull(0.4), BatchWidthLaw::deterministic(5), Distribution::exponential(1.0)},
      {Distribution::deterministic(1.0), BatchWidthLaw::hyper_geometric(5.0, 10.0), Distribution::exponential(1.0)},
      {Distribution::weibull(3.5, 2.0), BatchWidthLaw::geometric_from_1(3.0), Distribution::weibull(0.5, 4.0)},
      {Distribution::weibull(0.4), BatchWidthLaw::two_point(1, 9, 0.25), Distribution::deterministic(0.5)},
  };
  for (const auto& c : cases) {
    auto spec = single_class(Model::partly_open, c.size, c.burst, 0.5, c.think);
    SimOptions o;
    o.horizon = 1'000'000;
    o.seed = 8;
    auto r = run_replicated(spec, kFlowPs, o, 2);
    CHECK(r.overall.norm_fct.mean == doctest::Approx(2.0).epsilon(0.02));
  }
}

TEST_CASE("open batches: SRPT minimises mean FCT, per-batch SRPT beats per-batch PS") {
  auto spec = single_class(Model::open_batch, Distribution::weibull(0.4), BatchWidthLaw::geometric_from_1(10.0), 0.6);
  SimOptions o;
  o.horizon = 1'000'000;
  o.seed = 3;
  auto srpt = run(spec, kFlowSrpt, o);
  for (const auto& d : {kFlowPsjf, kFlowPs}) {
    auto other = run(spec, d, o);
    CHECK(srpt.overall.fct.mean <= other.overall.fct.mean + other.overall.fct.half_width);
  }
  auto bs = run(spec, kBatchSrpt, o);
  auto bp = run(spec, kBatchPs, o);
  CHECK(bs.overall.bct.mean <= bp.overall.bct.mean + bp.overall.bct.half_width);
}

TEST_CASE("simulated SRPT stays at or below the PSJF analysis") {
  for (double shape : {3.5, 0.4}) {
    for (double rho : {0.3, 0.6}) {
      auto w = BatchWidthLaw::geometric_from_1(100.0);
      auto size = Distribution::weibull(shape);
      auto spec = single_class(Model::open_batch, size, w, rho);
      SimOptions o;
      o.horizon = 5'000'000;
      o.seed = 21;
      auto sim = run(spec, kFlowSrpt, o);
      auto p = analysis::BatchModelParams::at_load(rho, w, size);
      double a = analysis::psjf_mean_bct(p).value;
      CHECK(sim.overall.bct.mean <= a + sim.overall.bct.half_width);
      CHECK(sim.overall.bct.mean >= 0.95 * a - sim.overall.bct.half_width);
    }
  }
}

TEST_CASE("closed model: one client alternates service and thinking") {
  auto spec = single_class(Model::closed, Distribution::exponential(2.0), BatchWidthLaw::deterministic(1), 0.0,
                           Distribution::exponential(3.0));
  spec.classes[0].clients = 1;
  SimOptions o;
  o.horizon = 400000;
  auto r = run(spec, kFlowPs, o);
  CHECK(r.utilization == doctest::Approx(2.0 / 5.0).epsilon(0.01));
  CHECK(r.overall.fct.mean == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("closed model reaches the calibrated PS utilization") {
  auto spec = single_class(Model::closed, Distribution::weibull(3.5), BatchWidthLaw::deterministic(1), 0.8);
  spec.classes[0].clients = 100;
  auto resolved = resolve_closed(spec);
  SimOptions o;
  o.horizon = 500000;
  auto r = run(resolved, kFlowPs, o);
  CHECK(r.utilization == doctest::Approx(0.8).epsilon(0.01));
}

TEST_CASE("batch means helpers") {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0};
  auto m = batch_means(v, 3.0);
  CHECK(m.mean == 3.0);
  // t_{0.975, 4} * sd / sqrt(5) with sd = sqrt(2.5)
  CHECK(m.half_width == doctest::Approx(2.776445105 * std::sqrt(2.5) / std::sqrt(5.0)).epsilon(1e-8));
  std::vector<double> w = {0.0, 0.5, 0.3, 0.2};
  CHECK(histogram_percentile(w, 50.0) == 1.0);
  CHECK(histogram_percentile(w, 99.9) == 3.0);
}
