#include "qsched/experiments/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qsched::experiments {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("config: " + what); }

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

std::string text(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) bad(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

flowsim::ClassSpec parse_class(const json& j) {
  if (!j.is_object()) bad("class entries must be objects");
  flowsim::ClassSpec c;
  if (j.contains("size")) c.size = parse_distribution(j.at("size"));
  if (j.contains("width")) c.width = parse_width(j.at("width"));
  if (j.contains("think")) c.think = parse_distribution(j.at("think"));
  c.share = number(j, "share", 1.0);
  c.clients = static_cast<int>(number(j, "clients", 0.0));
  return c;
}

SeriesSpec parse_series(const json& j, const json& defaults) {
  SeriesSpec s;
  s.label = j.value("label", defaults.value("label", std::string("main")));
  std::string model = j.contains("model") ? text(j, "model") : text(defaults, "model");
  s.traffic.model = flowsim::parse_model(model);
  const json& classes = j.contains("classes") ? j.at("classes") : defaults.at("classes");
  if (!classes.is_array() || classes.empty()) bad("classes must be a nonempty array");
  for (const auto& c : classes) s.traffic.classes.push_back(parse_class(c));
  const json& discs = j.contains("disciplines") ? j.at("disciplines") : defaults.at("disciplines");
  if (!discs.is_array() || discs.empty()) bad("disciplines must be a nonempty array");
  for (const auto& d : discs) s.disciplines.push_back(flowsim::Discipline::parse(d.get<std::string>()));
  s.psjf_analysis = j.value("psjf_analysis", defaults.value("psjf_analysis", false));
  return s;
}

}  // namespace

std::vector<double> default_load_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

Distribution parse_distribution(const json& j) {
  if (!j.is_object()) bad("distribution must be an object");
  std::string kind = text(j, "kind");
  double mean = number(j, "mean", 1.0);
  if (!(mean > 0.0)) bad("distribution mean must be positive");
  if (kind == "deterministic") return Distribution::deterministic(mean);
  if (kind == "exponential") return Distribution::exponential(mean);
  if (kind == "weibull") {
    if (j.contains("shape") == j.contains("cv2")) bad("weibull needs exactly one of shape, cv2");
    if (j.contains("shape")) {
      double shape = number(j, "shape", 1.0);
      if (!(shape > 0.0)) bad("weibull shape must be positive");
      return Distribution::weibull(shape, mean);
    }
    double cv2 = number(j, "cv2", 1.0);
    if (!(cv2 > 0.0)) bad("weibull cv2 must be positive");
    return Distribution::weibull_from_cv2(cv2, mean);
  }
  bad("unknown distribution kind '" + kind + "'");
}

json to_json(const Distribution& d) {
  switch (d.kind()) {
    case Distribution::Kind::deterministic:
      return {{"kind", "deterministic"}, {"mean", d.mean()}};
    case Distribution::Kind::exponential:
      return {{"kind", "exponential"}, {"mean", d.mean()}};
    case Distribution::Kind::weibull:
      return {{"kind", "weibull"}, {"mean", d.mean()}, {"shape", d.shape()}};
  }
  return {};
}

BatchWidthLaw parse_width(const json& j) {
  if (!j.is_object()) bad("width must be an object");
  std::string kind = text(j, "kind");
  double mean = number(j, "mean", 1.0);
  if (kind == "deterministic") {
    if (mean < 1.0 || std::floor(mean) != mean) bad("deterministic width must be an integer >= 1");
    return BatchWidthLaw::deterministic(static_cast<long>(mean));
  }
  if (kind == "geometric-from-1") return BatchWidthLaw::geometric_from_1(mean);
  if (kind == "geometric-from-0") return BatchWidthLaw::geometric_from_0(mean);
  if (kind == "hyper-geometric") return BatchWidthLaw::hyper_geometric(mean, number(j, "cv2", 1.0));
  if (kind == "two-point") {
    return BatchWidthLaw::two_point(static_cast<long>(number(j, "lo", 1.0)),
                                    static_cast<long>(number(j, "hi", 1.0)),
                                    number(j, "p_hi", 0.0));
  }
  bad("unknown width kind '" + kind + "'");
}

json to_json(const BatchWidthLaw& w) {
  switch (w.kind()) {
    case BatchWidthLaw::Kind::deterministic:
      return {{"kind", "deterministic"}, {"mean", w.min_width()}};
    case BatchWidthLaw::Kind::geometric_from_1:
      return {{"kind", "geometric-from-1"}, {"mean", w.mean()}};
    case BatchWidthLaw::Kind::geometric_from_0:
      return {{"kind", "geometric-from-0"}, {"mean", w.mean()}};
    case BatchWidthLaw::Kind::hyper_geometric:
      return {{"kind", "hyper-geometric"}, {"mean", w.mean()}, {"cv2", w.cv2()}};
    case BatchWidthLaw::Kind::two_point: {
      long lo = w.min_width(), hi = w.max_width();
      return {{"kind", "two-point"}, {"lo", lo}, {"hi", hi}, {"p_hi", lo == hi ? 0.0 : w.pmf(hi)}};
    }
  }
  return {};
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) bad("top level must be an object");
  ExperimentConfig c;
  c.name = j.value("name", std::string("custom"));
  std::string kind = j.value("kind", std::string("flow"));
  if (kind == "flow") {
    c.kind = ExperimentConfig::Kind::flow;
  } else if (kind == "vfs") {
    c.kind = ExperimentConfig::Kind::vfs;
  } else {
    bad("kind must be 'flow' or 'vfs'");
  }
  c.replications = static_cast<int>(number(j, "replications", 5));
  if (c.replications < 1) bad("replications must be >= 1");
  double seed = number(j, "seed", 1);
  if (seed < 0) bad("seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  double horizon = number(j, "horizon", 1e6);
  if (horizon < 1) bad("horizon must be >= 1");
  c.horizon = static_cast<std::uint64_t>(horizon);
  c.x_label = j.value("x_label", std::string("load"));
  if (j.contains("loads")) {
    if (!j.at("loads").is_array() || j.at("loads").empty()) bad("loads must be a nonempty array");
    for (const auto& l : j.at("loads")) c.loads.push_back(l.get<double>());
  } else if (j.contains("load")) {
    c.loads = {number(j, "load", 0.5)};
  } else {
    c.loads = default_load_grid();
  }
  for (double l : c.loads) {
    if (!(l > 0.0 && l < 1.0)) bad("loads must lie in (0, 1)");
  }
  if (c.kind == ExperimentConfig::Kind::vfs) {
    c.vfs.packets_per_flow = static_cast<int>(number(j, "packets_per_flow", 3000));
    c.vfs.packet_bytes = number(j, "packet_bytes", 1500.0);
    c.vfs.large_share = number(j, "large_share", 0.8);
    c.vfs.vfs.capacity = number(j, "capacity", 1500.0);
    c.vfs.vfs.theta = number(j, "theta", 5 * c.vfs.packet_bytes);
    c.vfs.vfs.discard_idle_credit = j.value("discard_idle_credit", true);
    return c;
  }
  if (j.contains("series")) {
    if (!j.at("series").is_array() || j.at("series").empty()) bad("series must be a nonempty array");
    for (const auto& s : j.at("series")) c.series.push_back(parse_series(s, j));
  } else {
    c.series.push_back(parse_series(j, j));
  }
  for (const auto& s : c.series) {
    flowsim::TrafficSpec probe = s.traffic;
    probe.load = c.loads.front();
    flowsim::validate(probe);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["kind"] = c.kind == ExperimentConfig::Kind::flow ? "flow" : "vfs";
  j["loads"] = c.loads;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["horizon"] = c.horizon;
  j["x_label"] = c.x_label;
  if (c.kind == ExperimentConfig::Kind::vfs) {
    j["packets_per_flow"] = c.vfs.packets_per_flow;
    j["packet_bytes"] = c.vfs.packet_bytes;
    j["large_share"] = c.vfs.large_share;
    j["capacity"] = c.vfs.vfs.capacity;
    j["theta"] = c.vfs.vfs.theta;
    j["discard_idle_credit"] = c.vfs.vfs.discard_idle_credit;
    return j;
  }
  j["series"] = json::array();
  for (const auto& s : c.series) {
    json js;
    js["label"] = s.label;
    js["model"] = flowsim::to_string(s.traffic.model);
    js["psjf_analysis"] = s.psjf_analysis;
    js["disciplines"] = json::array();
    for (const auto& d : s.disciplines) js["disciplines"].push_back(d.name());
    js["classes"] = json::array();
    for (const auto& cl : s.traffic.classes) {
      js["classes"].push_back({{"size", to_json(cl.size)},
                               {"width", to_json(cl.width)},
                               {"think", to_json(cl.think)},
                               {"share", cl.share},
                               {"clients", cl.clients}});
    }
    j["series"].push_back(js);
  }
  return j;
}

const char* config_schema() {
  return R"json({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "qsched experiment config",
  "type": "object",
  "$defs": {
    "distribution": {
      "type": "object",
      "required": ["kind"],
      "properties": {
        "kind": {"enum": ["deterministic", "exponential", "weibull"]},
        "mean": {"type": "number", "exclusiveMinimum": 0, "default": 1},
        "shape": {"type": "number", "exclusiveMinimum": 0},
        "cv2": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "width": {
      "type": "object",
      "required": ["kind"],
      "properties": {
        "kind": {"enum": ["deterministic", "geometric-from-1", "geometric-from-0",
                          "two-point", "hyper-geometric"]},
        "mean": {"type": "number"},
        "cv2": {"type": "number"},
        "lo": {"type": "integer", "minimum": 1},
        "hi": {"type": "integer", "minimum": 1},
        "p_hi": {"type": "number", "minimum": 0, "maximum": 1}
      }
    },
    "class": {
      "type": "object",
      "properties": {
        "size": {"$ref": "#/$defs/distribution"},
        "width": {"$ref": "#/$defs/width"},
        "think": {"$ref": "#/$defs/distribution"},
        "share": {"type": "number", "exclusiveMinimum": 0, "default": 1},
        "clients": {"type": "integer", "minimum": 0, "default": 0}
      }
    },
    "series": {
      "type": "object",
      "properties": {
        "label": {"type": "string"},
        "model": {"enum": ["open-batch", "partly-open", "closed"]},
        "classes": {"type": "array", "items": {"$ref": "#/$defs/class"}, "minItems": 1},
        "disciplines": {"type": "array", "minItems": 1,
                        "items": {"enum": ["per-flow-srpt", "per-flow-psjf", "per-flow-ps",
                                           "per-batch-srpt", "per-batch-ps"]}},
        "psjf_analysis": {"type": "boolean"}
      }
    }
  },
  "properties": {
    "name": {"type": "string"},
    "kind": {"enum": ["flow", "vfs"], "default": "flow"},
    "loads": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
    "load": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "replications": {"type": "integer", "minimum": 1, "default": 5},
    "seed": {"type": "integer", "minimum": 0, "default": 1},
    "horizon": {"type": "integer", "minimum": 1, "default": 1000000},
    "x_label": {"type": "string"},
    "series": {"type": "array", "items": {"$ref": "#/$defs/series"}},
    "model": {"$ref": "#/$defs/series/properties/model"},
    "classes": {"$ref": "#/$defs/series/properties/classes"},
    "disciplines": {"$ref": "#/$defs/series/properties/disciplines"},
    "packets_per_flow": {"type": "integer", "minimum": 1},
    "packet_bytes": {"type": "number", "exclusiveMinimum": 0},
    "large_share": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "capacity": {"type": "number", "exclusiveMinimum": 0},
    "theta": {"type": "number", "minimum": 0},
    "discard_idle_credit": {"type": "boolean"}
  }
})json";
}

}  // namespace qsched::experiments
