#include "qsched/flowsim/discipline.hpp"

#include <cmath>
#include <stdexcept>

#include "qsched/analysis.hpp"

namespace qsched::flowsim {

std::string Discipline::name() const {
  std::string out = granularity == Granularity::per_flow ? "per-flow-" : "per-batch-";
  switch (policy) {
    case Policy::srpt:
      return out + "srpt";
    case Policy::psjf:
      return out + "psjf";
    case Policy::ps:
      return out + "ps";
  }
  return out;
}

Discipline Discipline::parse(std::string_view text) {
  Discipline d;
  std::string_view rest;
  if (text.starts_with("per-flow-")) {
    d.granularity = Granularity::per_flow;
    rest = text.substr(9);
  } else if (text.starts_with("per-batch-")) {
    d.granularity = Granularity::per_batch;
    rest = text.substr(10);
  } else {
    throw std::invalid_argument("unknown discipline: " + std::string(text));
  }
  if (rest == "srpt") {
    d.policy = Policy::srpt;
  } else if (rest == "psjf") {
    d.policy = Policy::psjf;
  } else if (rest == "ps") {
    d.policy = Policy::ps;
  } else {
    throw std::invalid_argument("unknown discipline: " + std::string(text));
  }
  validate(d);
  return d;
}

void validate(const Discipline& d) {
  if (d.granularity == Granularity::per_batch && d.policy == Policy::psjf) {
    throw std::invalid_argument("per-batch PSJF is not supported");
  }
}

std::string to_string(Model m) {
  switch (m) {
    case Model::open_batch:
      return "open-batch";
    case Model::partly_open:
      return "partly-open";
    case Model::closed:
      return "closed";
  }
  return "?";
}

Model parse_model(std::string_view text) {
  if (text == "open-batch" || text == "open") return Model::open_batch;
  if (text == "partly-open") return Model::partly_open;
  if (text == "closed") return Model::closed;
  throw std::invalid_argument("unknown traffic model: " + std::string(text));
}

void validate(const TrafficSpec& spec) {
  if (spec.classes.empty()) throw std::invalid_argument("traffic needs at least one class");
  if (spec.model == Model::closed) {
    for (const auto& c : spec.classes) {
      if (c.clients < 1) throw std::invalid_argument("closed class needs clients >= 1");
    }
    if (spec.load >= 1.0) throw std::invalid_argument("target utilization must be < 1");
    return;
  }
  double total = 0.0;
  for (const auto& c : spec.classes) {
    if (!(c.share > 0.0)) throw std::invalid_argument("class share must be positive");
    total += c.share;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("class shares must sum to 1");
  if (!(spec.load > 0.0)) throw std::invalid_argument("load must be positive");
  if (spec.load >= 1.0) throw std::invalid_argument("unstable load (>= 1)");
}

TrafficSpec resolve_closed(const TrafficSpec& spec) {
  if (spec.model != Model::closed || spec.load <= 0.0) return spec;
  std::vector<analysis::ClosedClass> cc;
  for (const auto& c : spec.classes) {
    cc.push_back({c.clients, c.size.mean(), c.size.mean()});
  }
  double ratio = analysis::closed_think_ratio_for_utilization(cc, spec.load);
  TrafficSpec out = spec;
  for (auto& c : out.classes) {
    c.think = c.think.scaled(ratio * c.size.mean() / c.think.mean());
  }
  return out;
}

}  // namespace qsched::flowsim
