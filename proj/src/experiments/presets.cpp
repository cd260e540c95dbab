#include "qsched/experiments/presets.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qsched/analysis.hpp"
#include "qsched/experiments/compare.hpp"

namespace qsched::experiments {

using flowsim::ClassSpec;
using flowsim::Discipline;
using flowsim::Granularity;
using flowsim::Model;
using flowsim::Policy;

namespace {

const Discipline kFlowSrpt{Granularity::per_flow, Policy::srpt};
const Discipline kFlowPsjf{Granularity::per_flow, Policy::psjf};
const Discipline kFlowPs{Granularity::per_flow, Policy::ps};
const Discipline kBatchSrpt{Granularity::per_batch, Policy::srpt};
const Discipline kBatchPs{Granularity::per_batch, Policy::ps};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(5);
  os << v;
  return os.str();
}

std::vector<double> loads_of(const ResultSet& r, const std::string& series,
                             const std::string& disc) {
  std::vector<double> out;
  for (const auto& s : r.sims) {
    if (s.series == series && s.discipline.name() == disc) out.push_back(s.load);
  }
  return out;
}

flowsim::Metric metric_of(const flowsim::ClassReport& c, const std::string& metric) {
  if (metric == "norm_fct") return c.norm_fct;
  if (metric == "norm_bct") return c.norm_bct;
  if (metric == "fct") return c.fct;
  return c.bct;
}

// Strict ordering a < b with disjoint confidence intervals.
bool clearly_below(const flowsim::Metric& a, const flowsim::Metric& b) {
  return a.upper() < b.lower();
}

Preset fig2(bool low_variance) {
  Preset p;
  p.id = low_variance ? "fig2a" : "fig2b";
  p.description = low_variance
                      ? "Batch arrivals, geometric width mean 100, Weibull sizes shape 3.5"
                      : "Batch arrivals, geometric width mean 100, Weibull sizes shape 0.4";
  auto& c = p.config;
  c.name = p.id;
  c.loads = default_load_grid();
  // Batches of ~100 flows: 10^5 batches per replication.
  c.horizon = 10'000'000;
  SeriesSpec s;
  s.label = low_variance ? "cv2=0.1" : "cv2=10";
  s.traffic.model = Model::open_batch;
  ClassSpec cls;
  cls.size = Distribution::weibull(low_variance ? 3.5 : 0.4, 1.0);
  cls.width = BatchWidthLaw::geometric_from_1(100.0);
  s.traffic.classes = {cls};
  s.disciplines = {kFlowPsjf, kFlowSrpt, kFlowPs, kBatchSrpt, kBatchPs};
  s.psjf_analysis = true;
  c.series = {s};
  std::string label = s.label;
  p.checks.push_back({"psjf-fct-within-ci",
                      [label](const ResultSet& r) { return check_psjf_within_ci(r, label, "norm_fct"); }});
  p.checks.push_back({"psjf-bct-within-ci",
                      [label](const ResultSet& r) { return check_psjf_within_ci(r, label, "norm_bct"); }});
  p.checks.push_back({"srpt-not-above-psjf",
                      [label](const ResultSet& r) { return check_srpt_not_above_psjf(r, label); }});
  p.checks.push_back({"bct-ordering-0.7", [label, low_variance](const ResultSet& r) {
                        return check_bct_ordering(r, label, 0.7, low_variance);
                      }});
  return p;
}

Preset fig3(bool deterministic_size) {
  Preset p;
  p.id = deterministic_size ? "fig3a" : "fig3b";
  p.description = deterministic_size
                      ? "Partly-open bursts, deterministic sizes, exponential think mean 1"
                      : "Partly-open bursts, Weibull sizes shape 0.4, exponential think mean 1";
  auto& c = p.config;
  c.name = p.id;
  c.loads = default_load_grid();
  struct Burst {
    const char* label;
    BatchWidthLaw law;
  };
  const Burst bursts[] = {{"(1,0)", BatchWidthLaw::deterministic(1)},
                          {"(5,0)", BatchWidthLaw::deterministic(5)},
                          {"(5,10)", BatchWidthLaw::hyper_geometric(5.0, 10.0)}};
  std::vector<std::string> labels;
  for (const auto& b : bursts) {
    SeriesSpec s;
    s.label = b.label;
    s.traffic.model = Model::partly_open;
    ClassSpec cls;
    cls.size = deterministic_size ? Distribution::deterministic(1.0)
                                  : Distribution::weibull(0.4, 1.0);
    cls.width = b.law;
    cls.think = Distribution::exponential(1.0);
    s.traffic.classes = {cls};
    s.disciplines = {kFlowSrpt, kFlowPs};
    c.series.push_back(s);
    labels.push_back(s.label);
    std::string label = s.label;
    p.checks.push_back({"ps-baseline-" + label,
                        [label](const ResultSet& r) { return check_ps_baseline(r, label, 0.02); }});
  }
  if (deterministic_size) {
    p.checks.push_back({"burst-gap-shrinks-0.8", [labels](const ResultSet& r) {
                          return check_burst_gap_shrinks(r, labels, 0.8);
                        }});
  }
  return p;
}

Preset fig4(bool high_variance) {
  Preset p;
  p.id = high_variance ? "fig4b" : "fig4a";
  p.description = high_variance
                      ? "Two classes: size-1 bursts mean 5 cv2 10, size-2 single flows"
                      : "Two classes: size-1 bursts of exactly 5, size-2 single flows";
  auto& c = p.config;
  c.name = p.id;
  c.loads = default_load_grid();
  SeriesSpec s;
  s.label = high_variance ? "burst(5,10)" : "burst(5,0)";
  s.traffic.model = Model::partly_open;
  ClassSpec one;
  one.size = Distribution::deterministic(1.0);
  one.width = high_variance ? BatchWidthLaw::hyper_geometric(5.0, 10.0)
                            : BatchWidthLaw::deterministic(5);
  one.think = Distribution::exponential(1.0);
  one.share = 0.5;
  ClassSpec two;
  two.size = Distribution::deterministic(2.0);
  two.width = BatchWidthLaw::deterministic(1);
  two.think = Distribution::exponential(1.0);
  two.share = 0.5;
  s.traffic.classes = {one, two};
  s.disciplines = {kFlowSrpt, kFlowPs};
  c.series = {s};
  std::string label = s.label;
  p.checks.push_back({"ps-baseline",
                      [label](const ResultSet& r) { return check_ps_baseline(r, label, 0.02); }});
  if (high_variance) {
    p.checks.push_back({"srpt-overall-worse-high-load",
                        [label](const ResultSet& r) { return check_srpt_overall_worse(r, label, 0.8); }});
  }
  return p;
}

std::vector<double> closed_grid() {
  auto g = default_load_grid();
  g.push_back(0.95);
  g.push_back(0.98);
  return g;
}

Preset fig5(bool two_classes) {
  Preset p;
  p.id = two_classes ? "fig5b" : "fig5a";
  p.description = two_classes
                      ? "Closed model: 50 clients size 1 cv2 0.1, 50 clients size 2 cv2 0.1"
                      : "Closed model: 100 clients, sizes mean 1 with cv2 0.1 or 10";
  auto& c = p.config;
  c.name = p.id;
  c.loads = closed_grid();
  c.x_label = "utilization";
  auto client = [](double mean, double shape, int n) {
    ClassSpec cls;
    cls.size = Distribution::weibull(shape, mean);
    cls.width = BatchWidthLaw::deterministic(1);
    cls.think = Distribution::exponential(1.0);
    cls.clients = n;
    return cls;
  };
  if (two_classes) {
    SeriesSpec s;
    s.label = "50+50";
    s.traffic.model = Model::closed;
    ClassSpec one = client(1.0, 3.5, 50);
    ClassSpec two = client(2.0, 3.5, 50);
    one.share = two.share = 0.5;
    s.traffic.classes = {one, two};
    s.disciplines = {kFlowSrpt, kFlowPs};
    c.series = {s};
    p.checks.push_back({"class2-starved-0.98", [](const ResultSet& r) {
                          return check_class_starvation(r, "50+50", 1, 0.98);
                        }});
  } else {
    for (double shape : {3.5, 0.4}) {
      SeriesSpec s;
      s.label = shape > 1.0 ? "cv2=0.1" : "cv2=10";
      s.traffic.model = Model::closed;
      s.traffic.classes = {client(1.0, shape, 100)};
      s.disciplines = {kFlowSrpt, kFlowPs};
      c.series.push_back(s);
    }
    p.checks.push_back({"srpt-insensitive", [](const ResultSet& r) {
                          return check_srpt_insensitive(r, "cv2=0.1", "cv2=10", 0.10);
                        }});
  }
  return p;
}

Preset fig6() {
  Preset p;
  p.id = "fig6";
  p.description = "VFS link: 3000-packet flows (80% of load) plus single-packet flows";
  auto& c = p.config;
  c.name = p.id;
  c.kind = ExperimentConfig::Kind::vfs;
  c.loads = default_load_grid();
  c.horizon = 2000;
  c.replications = 1;
  p.checks.push_back({"fct-within-5pct", [](const ResultSet& r) { return check_vfs_fct(r, 0.2, 0.05); }});
  p.checks.push_back({"p999-active-0.9", [](const ResultSet& r) {
                        return check_vfs_p999(r, 0.9, analysis::active_count_percentile(0.9, 99.9), 2.0);
                      }});
  return p;
}

}  // namespace

std::vector<std::string> preset_ids() {
  return {"fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig6"};
}

Preset make_preset(std::string_view id) {
  if (id == "fig2a") return fig2(true);
  if (id == "fig2b") return fig2(false);
  if (id == "fig3a") return fig3(true);
  if (id == "fig3b") return fig3(false);
  if (id == "fig4a") return fig4(false);
  if (id == "fig4b") return fig4(true);
  if (id == "fig5a") return fig5(false);
  if (id == "fig5b") return fig5(true);
  if (id == "fig6") return fig6();
  throw std::invalid_argument("unknown figure id '" + std::string(id) + "'");
}

std::optional<CheckOutcome> check_psjf_within_ci(const ResultSet& r, const std::string& series,
                                                 const std::string& metric) {
  std::vector<SeriesPoint> ref, obs;
  for (double load : loads_of(r, series, "per-flow-psjf")) {
    const auto* a = r.find_analysis(series, metric, load);
    const auto* s = r.find(series, "per-flow-psjf", load);
    if (!a || !s) continue;
    auto m = metric_of(s->report.overall, metric);
    ref.push_back({load, a->value, 0.0});
    obs.push_back({load, m.mean, m.half_width});
  }
  if (ref.empty()) return std::nullopt;
  auto v = compare(ref, obs, CompareMode::within_ci, 0.0);
  std::string detail = v.summary();
  for (const auto& pt : v.points) {
    if (!pt.pass) {
      detail += "; load " + fmt(pt.load) + " analysis " + fmt(pt.reference) + " sim " +
                fmt(pt.observed) + " +- " + fmt(pt.half_width);
    }
  }
  return CheckOutcome{v.pass, detail};
}

std::optional<CheckOutcome> check_ps_baseline(const ResultSet& r, const std::string& series,
                                              double tolerance) {
  std::vector<SeriesPoint> ref, obs;
  for (double load : loads_of(r, series, "per-flow-ps")) {
    const auto* s = r.find(series, "per-flow-ps", load);
    ref.push_back({load, analysis::ps_open_mean_fct(load), 0.0});
    obs.push_back({load, s->report.overall.norm_fct.mean, s->report.overall.norm_fct.half_width});
  }
  if (ref.empty()) return std::nullopt;
  auto v = compare(ref, obs, CompareMode::relative, tolerance);
  return CheckOutcome{v.pass, v.summary()};
}

std::optional<CheckOutcome> check_srpt_not_above_psjf(const ResultSet& r,
                                                      const std::string& series) {
  std::vector<SeriesPoint> ref, obs;
  for (double load : loads_of(r, series, "per-flow-srpt")) {
    const auto* a = r.find_analysis(series, "norm_bct", load);
    const auto* s = r.find(series, "per-flow-srpt", load);
    if (!a) continue;
    ref.push_back({load, a->value, 0.0});
    obs.push_back({load, s->report.overall.norm_bct.mean, s->report.overall.norm_bct.half_width});
  }
  if (ref.empty()) return std::nullopt;
  auto v = compare(ref, obs, CompareMode::not_above, 0.0);
  return CheckOutcome{v.pass, v.summary()};
}

std::optional<CheckOutcome> check_bct_ordering(const ResultSet& r, const std::string& series,
                                               double load, bool srpt_worse) {
  const auto* fs = r.find(series, "per-flow-srpt", load);
  const auto* fp = r.find(series, "per-flow-ps", load);
  const auto* bs = r.find(series, "per-batch-srpt", load);
  const auto* bp = r.find(series, "per-batch-ps", load);
  if (!fs || !fp || !bs || !bp) return std::nullopt;
  auto m_fs = fs->report.overall.norm_bct;
  auto m_fp = fp->report.overall.norm_bct;
  auto m_bs = bs->report.overall.norm_bct;
  auto m_bp = bp->report.overall.norm_bct;
  bool flow_order = srpt_worse ? clearly_below(m_fp, m_fs) : clearly_below(m_fs, m_fp);
  bool batch_order = m_bs.mean <= m_bp.mean || m_bs.lower() <= m_bp.upper();
  bool batch_wins = clearly_below(m_bp, m_fs) && clearly_below(m_bp, m_fp);
  std::string detail = "flow-srpt " + fmt(m_fs.mean) + "+-" + fmt(m_fs.half_width) +
                       ", flow-ps " + fmt(m_fp.mean) + "+-" + fmt(m_fp.half_width) +
                       ", batch-srpt " + fmt(m_bs.mean) + "+-" + fmt(m_bs.half_width) +
                       ", batch-ps " + fmt(m_bp.mean) + "+-" + fmt(m_bp.half_width);
  return CheckOutcome{flow_order && batch_order && batch_wins, detail};
}

std::optional<CheckOutcome> check_burst_gap_shrinks(const ResultSet& r,
                                                    const std::vector<std::string>& series,
                                                    double load) {
  std::vector<double> gaps;
  std::string detail = "gaps";
  for (const auto& s : series) {
    const auto* srpt = r.find(s, "per-flow-srpt", load);
    const auto* ps = r.find(s, "per-flow-ps", load);
    if (!srpt || !ps) return std::nullopt;
    gaps.push_back(ps->report.overall.norm_fct.mean - srpt->report.overall.norm_fct.mean);
    detail += " " + s + "=" + fmt(gaps.back());
  }
  bool pass = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) pass = pass && gaps[i] < gaps[i - 1];
  return CheckOutcome{pass, detail};
}

std::optional<CheckOutcome> check_srpt_overall_worse(const ResultSet& r, const std::string& series,
                                                     double min_load) {
  double top = -1.0;
  for (double load : loads_of(r, series, "per-flow-srpt")) top = std::max(top, load);
  if (top < min_load) return std::nullopt;
  const auto* srpt = r.find(series, "per-flow-srpt", top);
  const auto* ps = r.find(series, "per-flow-ps", top);
  if (!srpt || !ps) return std::nullopt;
  auto a = srpt->report.overall.fct;
  auto b = ps->report.overall.fct;
  return CheckOutcome{clearly_below(b, a), "load " + fmt(top) + ": srpt " + fmt(a.mean) + "+-" +
                                               fmt(a.half_width) + ", ps " + fmt(b.mean) +
                                               "+-" + fmt(b.half_width)};
}

std::optional<CheckOutcome> check_class_starvation(const ResultSet& r, const std::string& series,
                                                   int cls, double min_load) {
  bool any = false;
  bool pass = true;
  std::string detail;
  for (double load : loads_of(r, series, "per-flow-srpt")) {
    if (load < min_load - 1e-9) continue;
    const auto* srpt = r.find(series, "per-flow-srpt", load);
    const auto* ps = r.find(series, "per-flow-ps", load);
    if (!ps || srpt->report.classes.size() <= static_cast<std::size_t>(cls)) continue;
    any = true;
    auto a = srpt->report.classes[cls].norm_fct;
    auto b = ps->report.overall.norm_fct;
    pass = pass && a.mean > b.mean;
    detail += "load " + fmt(load) + ": srpt class " + std::to_string(cls + 1) + " " +
              fmt(a.mean) + ", ps " + fmt(b.mean) + "; ";
  }
  if (!any) return std::nullopt;
  return CheckOutcome{pass, detail};
}

std::optional<CheckOutcome> check_srpt_insensitive(const ResultSet& r, const std::string& a,
                                                   const std::string& b, double tolerance) {
  double worst = 0.0;
  bool any = false;
  for (double load : loads_of(r, a, "per-flow-srpt")) {
    const auto* x = r.find(a, "per-flow-srpt", load);
    const auto* y = r.find(b, "per-flow-srpt", load);
    if (!y) continue;
    any = true;
    double lo = std::min(x->report.overall.fct.mean, y->report.overall.fct.mean);
    double hi = std::max(x->report.overall.fct.mean, y->report.overall.fct.mean);
    worst = std::max(worst, hi / lo - 1.0);
  }
  if (!any) return std::nullopt;
  return CheckOutcome{worst < tolerance, "max relative difference " + fmt(worst)};
}

std::optional<CheckOutcome> check_vfs_fct(const ResultSet& r, double min_load, double tolerance) {
  std::vector<SeriesPoint> ref, obs;
  for (const auto& v : r.vfs) {
    if (v.load < min_load - 1e-9) continue;
    ref.push_back({v.load, analysis::ps_open_mean_fct(v.load), 0.0});
    obs.push_back({v.load, v.norm_fct.mean, v.norm_fct.half_width});
  }
  if (ref.empty()) return std::nullopt;
  auto v = compare(ref, obs, CompareMode::relative, tolerance);
  return CheckOutcome{v.pass, v.summary()};
}

std::optional<CheckOutcome> check_vfs_p999(const ResultSet& r, double load, double target,
                                           double slack) {
  for (const auto& v : r.vfs) {
    if (std::abs(v.load - load) < 1e-9) {
      return CheckOutcome{std::abs(v.p999_active - target) <= slack,
                          "p999 " + fmt(v.p999_active) + " vs " + fmt(target)};
    }
  }
  return std::nullopt;
}

}  // namespace qsched::experiments
