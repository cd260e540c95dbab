#include "qsched/experiments/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "qsched/analysis.hpp"
#include "qsched/flowsim/simulator.hpp"
#include "qsched/rng.hpp"

namespace qsched::experiments {

namespace {

bool same_load(double a, double b) { return std::abs(a - b) < 1e-9; }

bool ps_insensitive(const flowsim::TrafficSpec& t) {
  if (t.model == flowsim::Model::partly_open) return true;
  if (t.model != flowsim::Model::open_batch) return false;
  for (const auto& c : t.classes) {
    if (c.width.kind() != BatchWidthLaw::Kind::deterministic || c.width.min_width() != 1) {
      return false;
    }
  }
  return true;
}

bool psjf_applicable(const SeriesSpec& s) {
  return s.psjf_analysis && s.traffic.model == flowsim::Model::open_batch &&
         s.traffic.classes.size() == 1 && !s.traffic.classes[0].size.atomic();
}

void run_jobs(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

const SimRow* ResultSet::find(std::string_view series, std::string_view discipline,
                              double load) const {
  for (const auto& r : sims) {
    if (r.series == series && r.discipline.name() == discipline && same_load(r.load, load)) {
      return &r;
    }
  }
  return nullptr;
}

const AnalysisRow* ResultSet::find_analysis(std::string_view series, std::string_view metric,
                                            double load) const {
  for (const auto& r : analysis) {
    if (r.series == series && r.metric == metric && same_load(r.load, load)) return &r;
  }
  return nullptr;
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("QSCHED_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

std::vector<AnalysisRow> analysis_rows(const ExperimentConfig& c) {
  std::vector<AnalysisRow> rows;
  if (c.kind == ExperimentConfig::Kind::vfs) {
    for (double rho : c.loads) {
      rows.push_back({"vfs", "ps", rho, "norm_fct", "E[X]", analysis::ps_open_mean_fct(rho), 0.0});
      rows.push_back({"vfs", "ps", rho, "p999_active", "none",
                      analysis::active_count_percentile(rho, 99.9), 0.0});
    }
    return rows;
  }
  for (const auto& s : c.series) {
    for (double rho : c.loads) {
      if (psjf_applicable(s)) {
        const auto& cls = s.traffic.classes[0];
        auto p = analysis::BatchModelParams::at_load(rho, cls.width, cls.size);
        auto fct = analysis::psjf_mean_fct(p);
        auto bct = analysis::psjf_mean_bct(p);
        rows.push_back({s.label, "per-flow-psjf", rho, "norm_fct", "E[X]",
                        fct.value / cls.size.mean(), fct.error / cls.size.mean()});
        double es = p.mean_batch_size();
        rows.push_back({s.label, "per-flow-psjf", rho, "norm_bct", "E[S]", bct.value / es,
                        bct.error / es});
      }
      if (ps_insensitive(s.traffic)) {
        rows.push_back({s.label, "per-flow-ps", rho, "norm_fct", "E[X]",
                        analysis::ps_open_mean_fct(rho), 0.0});
      }
    }
  }
  return rows;
}

ResultSet execute(const ExperimentConfig& c, int threads, const Progress& progress) {
  ResultSet out;
  out.figure = c.name;
  out.x_label = c.x_label;
  out.seed = c.seed;
  out.analysis = analysis_rows(c);

  std::mutex progress_mutex;
  auto say = [&](const std::string& msg) {
    if (!progress) return;
    std::lock_guard lock(progress_mutex);
    progress(msg);
  };

  if (c.kind == ExperimentConfig::Kind::vfs) {
    out.vfs.resize(c.loads.size());
    run_jobs(c.loads.size(), threads, [&](std::size_t i) {
      vfs::Fig6Options o = c.vfs;
      o.load = c.loads[i];
      o.seed = derive_seed(c.seed, i);
      o.large_flows = c.horizon;
      out.vfs[i] = vfs::run_fig6(o);
      say("vfs load " + std::to_string(o.load) + " done");
    });
    return out;
  }

  struct Point {
    const SeriesSpec* series;
    flowsim::Discipline disc;
    double load;
    flowsim::TrafficSpec traffic;
  };
  std::vector<Point> points;
  for (const auto& s : c.series) {
    for (double rho : c.loads) {
      flowsim::TrafficSpec t = s.traffic;
      t.load = rho;
      t = flowsim::resolve_closed(t);
      for (const auto& d : s.disciplines) points.push_back({&s, d, rho, t});
    }
  }
  std::size_t reps = static_cast<std::size_t>(c.replications);
  std::vector<flowsim::SimReport> parts(points.size() * reps);
  run_jobs(parts.size(), threads, [&](std::size_t j) {
    const Point& p = points[j / reps];
    flowsim::SimOptions o;
    o.horizon = c.horizon;
    o.seed = derive_seed(c.seed, j % reps);
    parts[j] = flowsim::run(p.traffic, p.disc, o);
    say(p.series->label + " " + p.disc.name() + " load " + std::to_string(p.load) + " rep " +
        std::to_string(j % reps) + " done");
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    SimRow row;
    row.series = points[i].series->label;
    row.discipline = points[i].disc;
    row.load = points[i].load;
    row.has_batches = points[i].traffic.model == flowsim::Model::open_batch;
    row.report = flowsim::merge(std::span(parts).subspan(i * reps, reps));
    out.sims.push_back(std::move(row));
  }
  return out;
}

}  // namespace qsched::experiments
