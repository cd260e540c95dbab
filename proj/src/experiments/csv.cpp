#include "qsched/experiments/csv.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace qsched::experiments {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

namespace {

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Row {
  std::string series, source, discipline, cls, metric, normalization;
  double load, value, half_width;
  std::uint64_t samples;
};

std::vector<Row> flatten(const ResultSet& r) {
  std::vector<Row> rows;
  for (const auto& a : r.analysis) {
    rows.push_back({a.series, "analysis", a.discipline, "all", a.metric, a.normalization, a.load,
                    a.value, a.error, 0});
  }
  for (const auto& s : r.sims) {
    auto emit = [&](const std::string& cls, const flowsim::ClassReport& c) {
      std::string d = s.discipline.name();
      rows.push_back({s.series, "simulation", d, cls, "fct", "none", s.load, c.fct.mean,
                      c.fct.half_width, c.flows});
      rows.push_back({s.series, "simulation", d, cls, "norm_fct", "E[X]", s.load, c.norm_fct.mean,
                      c.norm_fct.half_width, c.flows});
      if (s.has_batches) {
        rows.push_back({s.series, "simulation", d, cls, "bct", "none", s.load, c.bct.mean,
                        c.bct.half_width, c.batches});
        rows.push_back({s.series, "simulation", d, cls, "norm_bct", "E[S]", s.load,
                        c.norm_bct.mean, c.norm_bct.half_width, c.batches});
      }
    };
    emit("all", s.report.overall);
    if (s.report.classes.size() > 1) {
      for (std::size_t k = 0; k < s.report.classes.size(); ++k) {
        emit(std::to_string(k + 1), s.report.classes[k]);
      }
    }
    std::string d = s.discipline.name();
    rows.push_back({s.series, "simulation", d, "all", "p999_active", "none", s.load,
                    s.report.p999_active, 0.0, s.report.completions});
    rows.push_back({s.series, "simulation", d, "all", "utilization", "none", s.load,
                    s.report.utilization, 0.0, s.report.completions});
  }
  for (const auto& v : r.vfs) {
    rows.push_back({"vfs", "simulation", "vfs", "large", "norm_fct", "E[X]", v.load,
                    v.norm_fct.mean, v.norm_fct.half_width, v.large_completed});
    rows.push_back({"vfs", "simulation", "vfs", "all", "p999_active", "none", v.load,
                    v.p999_active, 0.0, v.large_completed});
    rows.push_back({"vfs", "simulation", "vfs", "all", "drop_rate", "none", v.load, v.drop_rate,
                    0.0, v.large_completed});
  }
  return rows;
}

}  // namespace

void write_results_csv(std::ostream& os, const ResultSet& r) {
  os << "figure,series,source,discipline,class,load,metric,normalization,value,half_width,"
        "samples,seed\n";
  for (const auto& row : flatten(r)) {
    os << field(r.figure) << ',' << field(row.series) << ',' << row.source << ',' << row.discipline << ','
       << row.cls << ',' << format_number(row.load) << ',' << row.metric << ','
       << row.normalization << ',' << format_number(row.value) << ','
       << format_number(row.half_width) << ',' << row.samples << ',' << r.seed << '\n';
  }
}

void write_gnuplot(std::ostream& os, const ResultSet& r) {
  // Insertion-ordered grouping keeps the output deterministic.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const Row*>> blocks;
  auto rows = flatten(r);
  for (const auto& row : rows) {
    std::string key = row.series + " " + row.source + " " + row.discipline + " class=" +
                      row.cls + " " + row.metric;
    if (!blocks.count(key)) order.push_back(key);
    blocks[key].push_back(&row);
  }
  bool first = true;
  for (const auto& key : order) {
    if (!first) os << "\n\n";
    first = false;
    os << "# " << r.figure << " " << key << "\n# " << r.x_label << " value half_width\n";
    for (const Row* row : blocks[key]) {
      os << format_number(row->load) << ' ' << format_number(row->value) << ' '
         << format_number(row->half_width) << '\n';
    }
  }
}

void write_vfs_csv(std::ostream& os, const std::vector<vfs::VfsReport>& rows) {
  os << "load,mean-normalized-FCT,p999-active-flows,drop-rate,theta,seed\n";
  for (const auto& v : rows) {
    os << format_number(v.load) << ',' << format_number(v.norm_fct.mean) << ','
       << format_number(v.p999_active) << ',' << format_number(v.drop_rate) << ','
       << format_number(v.theta) << ',' << v.seed << '\n';
  }
}

void write_analysis_csv(std::ostream& os, const std::string& model,
                        const std::vector<AnalysisRow>& rows) {
  os << "model,discipline,load,metric,value,normalization\n";
  for (const auto& a : rows) {
    os << model << ',' << a.discipline << ',' << format_number(a.load) << ',' << a.metric << ','
       << format_number(a.value) << ',' << a.normalization << '\n';
  }
}

}  // namespace qsched::experiments
