#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qsched/experiments/runner.hpp"

namespace qsched::experiments {

// Columns: figure, series, source, discipline, class, load, metric,
// normalization, value, half_width, samples, seed. Floats carry 10
// significant digits; row order follows the config.
void write_results_csv(std::ostream& os, const ResultSet& r);

// One gnuplot data block per (series, discipline, metric), blank-line
// separated and indexable with `index`.
void write_gnuplot(std::ostream& os, const ResultSet& r);

// load, mean-normalized-FCT, p999-active-flows, drop-rate, theta, seed
void write_vfs_csv(std::ostream& os, const std::vector<vfs::VfsReport>& rows);

// model, discipline, load, metric, value, normalization
void write_analysis_csv(std::ostream& os, const std::string& model,
                        const std::vector<AnalysisRow>& rows);

std::string format_number(double v);

}  // namespace qsched::experiments
