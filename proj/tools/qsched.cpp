#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsched/experiments/config.hpp"
#include "qsched/experiments/csv.hpp"
#include "qsched/experiments/presets.hpp"
#include "qsched/experiments/runner.hpp"
#include "qsched/flowsim/simulator.hpp"
#include "qsched/vfs_harness.hpp"

namespace fs = std::filesystem;
namespace ex = qsched::experiments;

namespace {

// Opens `path` for writing, or returns nullopt after reporting the error.
std::optional<std::ofstream> open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "qsched: cannot write " << path << "\n";
    return std::nullopt;
  }
  return f;
}

template <class Fn>
int with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return 0;
  }
  auto f = open_out(path);
  if (!f) return 2;
  fn(*f);
  return f->good() ? 0 : 2;
}

struct AnalyzeArgs {
  std::string size_kind = "weibull";
  double size_mean = 1.0;
  std::optional<double> size_shape;
  std::optional<double> size_cv2;
  std::string width_kind = "geometric-from-1";
  double width_mean = 100.0;
  double width_cv2 = 1.0;
  std::vector<double> loads = ex::default_load_grid();
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  nlohmann::json size = {{"kind", a.size_kind}, {"mean", a.size_mean}};
  if (a.size_shape) size["shape"] = *a.size_shape;
  if (a.size_cv2) size["cv2"] = *a.size_cv2;
  if (a.size_kind == "weibull" && !a.size_shape && !a.size_cv2) size["shape"] = 3.5;
  nlohmann::json width = {{"kind", a.width_kind}, {"mean", a.width_mean}, {"cv2", a.width_cv2}};
  nlohmann::json cfg = {{"model", "open-batch"},
                        {"loads", a.loads},
                        {"psjf_analysis", true},
                        {"disciplines", {"per-flow-psjf"}},
                        {"classes", {{{"size", size}, {"width", width}}}}};
  auto config = ex::parse_config(cfg);
  auto rows = ex::analysis_rows(config);
  if (rows.empty()) {
    std::cerr << "qsched: no closed form applies to this configuration\n";
    return 2;
  }
  return with_output(a.out, [&](std::ostream& os) { ex::write_analysis_csv(os, "open-batch", rows); });
}

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<int> replications;
  std::vector<double> loads;
  std::string out;
  std::string gnuplot;
  std::string log;
};

int write_results(const ex::ResultSet& r, const std::string& out, const std::string& gnuplot) {
  int rc = with_output(out, [&](std::ostream& os) { ex::write_results_csv(os, r); });
  if (rc == 0 && !gnuplot.empty()) {
    rc = with_output(gnuplot, [&](std::ostream& os) { ex::write_gnuplot(os, r); });
  }
  return rc;
}

int cmd_simulate(const SimulateArgs& a) {
  auto config = ex::load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.horizon) config.horizon = *a.horizon;
  if (a.replications) config.replications = *a.replications;
  if (!a.loads.empty()) config.loads = a.loads;
  if (!a.log.empty()) {
    if (config.kind != ex::ExperimentConfig::Kind::flow) {
      std::cerr << "qsched: --log applies to flow experiments only\n";
      return 2;
    }
    auto f = open_out(a.log);
    if (!f) return 2;
    qsched::flowsim::write_log_header(*f);
    const auto& s = config.series.front();
    auto traffic = s.traffic;
    traffic.load = config.loads.front();
    traffic = qsched::flowsim::resolve_closed(traffic);
    qsched::flowsim::SimOptions o;
    o.horizon = config.horizon;
    o.seed = config.seed;
    o.log = [&](const qsched::flowsim::LogEvent& e) { qsched::flowsim::write_log_event(*f, e); };
    qsched::flowsim::run(traffic, s.disciplines.front(), o);
    if (!f->good()) return 2;
  }
  auto r = ex::execute(config);
  return write_results(r, a.out, a.gnuplot);
}

struct VfsArgs {
  std::vector<double> loads = {0.5};
  std::uint64_t seed = 1;
  std::uint64_t flows = 2000;
  double theta = 7500.0;
  bool keep_idle_credit = false;
  std::string out;
};

int cmd_vfs(const VfsArgs& a) {
  std::vector<qsched::vfs::VfsReport> rows;
  for (std::size_t i = 0; i < a.loads.size(); ++i) {
    qsched::vfs::Fig6Options o;
    o.load = a.loads[i];
    o.seed = a.seed;
    o.large_flows = a.flows;
    o.vfs.theta = a.theta;
    o.vfs.discard_idle_credit = !a.keep_idle_credit;
    rows.push_back(qsched::vfs::run_fig6(o));
  }
  return with_output(a.out, [&](std::ostream& os) { ex::write_vfs_csv(os, rows); });
}

struct ReproduceArgs {
  std::string figure;
  std::string out = ".";
  std::vector<double> loads;
  std::optional<int> replications;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> seed;
  bool gnuplot = false;
  bool quiet = false;
};

int cmd_reproduce(const ReproduceArgs& a) {
  auto preset = ex::make_preset(a.figure);
  auto& c = preset.config;
  if (!a.loads.empty()) c.loads = a.loads;
  if (a.replications) c.replications = *a.replications;
  if (a.horizon) c.horizon = *a.horizon;
  if (a.seed) c.seed = *a.seed;

  std::error_code ec;
  fs::create_directories(a.out, ec);
  fs::path csv = fs::path(a.out) / (preset.id + ".csv");
  auto probe = open_out(csv.string());
  if (!probe) return 2;
  probe->close();

  ex::Progress progress;
  if (!a.quiet) progress = [](const std::string& m) { std::cerr << "  " << m << "\n"; };
  auto r = ex::execute(c, ex::worker_count(), progress);
  std::string gp = a.gnuplot ? (fs::path(a.out) / (preset.id + ".dat")).string() : "";
  if (int rc = write_results(r, csv.string(), gp); rc != 0) return rc;

  bool ok = true;
  for (const auto& check : preset.checks) {
    auto outcome = check.run(r);
    if (!outcome) {
      std::cerr << "SKIP " << preset.id << " " << check.name << "\n";
      continue;
    }
    ok = ok && outcome->pass;
    std::cerr << (outcome->pass ? "PASS " : "FAIL ") << preset.id << " " << check.name << ": "
              << outcome->detail << "\n";
  }
  std::cout << csv.string() << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch and burst flow scheduling experiments"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "PSJF batch-model analysis over a load grid");
  analyze->add_option("--size", an.size_kind, "Flow size law")
      ->check(CLI::IsMember({"exponential", "weibull"}));
  analyze->add_option("--size-mean", an.size_mean, "Mean flow size");
  analyze->add_option("--size-shape", an.size_shape, "Weibull shape");
  analyze->add_option("--size-cv2", an.size_cv2, "Weibull squared coefficient of variation");
  analyze->add_option("--width", an.width_kind, "Batch width law")
      ->check(CLI::IsMember({"deterministic", "geometric-from-1", "geometric-from-0", "hyper-geometric"}));
  analyze->add_option("--width-mean", an.width_mean, "Mean batch width");
  analyze->add_option("--width-cv2", an.width_cv2, "Batch width cv2 (hyper-geometric)");
  analyze->add_option("--loads", an.loads, "Load grid")->delimiter(',');
  analyze->add_option("--out", an.out, "Output CSV (default stdout)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a JSON experiment config");
  simulate->add_option("--config", sim.config, "Config file")->required();
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--horizon", sim.horizon, "Flows per replication");
  simulate->add_option("--replications", sim.replications, "Replications per point");
  simulate->add_option("--loads", sim.loads, "Load grid override")->delimiter(',');
  simulate->add_option("--out", sim.out, "Output CSV (default stdout)");
  simulate->add_option("--gnuplot", sim.gnuplot, "Also write gnuplot data blocks here");
  simulate->add_option("--log", sim.log,
                       "Also write the event log of one run (first series, discipline, load)");

  VfsArgs va;
  auto* vfs = app.add_subcommand("vfs", "Run the VFS link experiment");
  vfs->add_option("--load", va.loads, "Load(s)")->required()->delimiter(',');
  vfs->add_option("--seed", va.seed, "Seed");
  vfs->add_option("--flows", va.flows, "Large flows per run");
  vfs->add_option("--theta", va.theta, "Drop threshold in bytes");
  vfs->add_flag("--keep-idle-credit", va.keep_idle_credit,
                "Bank credit accrued while no flow is active");
  vfs->add_option("--out", va.out, "Output CSV (default stdout)");

  ReproduceArgs ra;
  auto* reproduce = app.add_subcommand("reproduce", "Run a built-in figure preset");
  reproduce->add_option("figure", ra.figure, "Figure id")->required();
  reproduce->add_option("--out", ra.out, "Output directory");
  reproduce->add_option("--loads", ra.loads, "Load grid override")->delimiter(',');
  reproduce->add_option("--replications", ra.replications, "Replications per point");
  reproduce->add_option("--horizon", ra.horizon, "Flows per replication");
  reproduce->add_option("--seed", ra.seed, "Base seed");
  reproduce->add_flag("--gnuplot", ra.gnuplot, "Also write <figure>.dat gnuplot blocks");
  reproduce->add_flag("--quiet", ra.quiet, "No progress messages");

  auto* presets = app.add_subcommand("presets", "List figure presets");
  std::string show;
  presets->add_option("--show", show, "Print one preset as a JSON config");
  app.add_subcommand("schema", "Print the JSON schema of experiment configs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return cmd_analyze(an);
    if (*simulate) return cmd_simulate(sim);
    if (*vfs) return cmd_vfs(va);
    if (*reproduce) return cmd_reproduce(ra);
    if (*presets) {
      if (!show.empty()) {
        std::cout << ex::to_json(ex::make_preset(show).config).dump(2) << "\n";
        return 0;
      }
      for (const auto& id : ex::preset_ids()) {
        std::cout << id << "  " << ex::make_preset(id).description << "\n";
      }
      return 0;
    }
    std::cout << ex::config_schema() << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qsched: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qsched: " << e.what() << "\n";
    return 3;
  }
}
