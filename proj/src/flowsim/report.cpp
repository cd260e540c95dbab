#include "qsched/flowsim/report.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace qsched::flowsim {

Bin& Bin::operator+=(const Bin& o) {
  fct_sum += o.fct_sum;
  size_sum += o.size_sum;
  flows += o.flows;
  bct_sum += o.bct_sum;
  bsize_sum += o.bsize_sum;
  batches += o.batches;
  return *this;
}

Metric batch_means(std::span<const double> values, double point) {
  Metric m;
  m.mean = point;
  double n = 0.0, sum = 0.0, sq = 0.0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    n += 1.0;
    sum += v;
  }
  if (n < 2.0) return m;
  double avg = sum / n;
  for (double v : values) {
    if (!std::isnan(v)) sq += (v - avg) * (v - avg);
  }
  double sd = std::sqrt(sq / (n - 1.0));
  boost::math::students_t t(n - 1.0);
  m.half_width = boost::math::quantile(t, 0.975) * sd / std::sqrt(n);
  return m;
}

namespace {

double ratio(double a, double b) {
  return b > 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN();
}

ClassReport summarize(const std::vector<Bin>& bins) {
  Bin total;
  std::vector<double> fct, nfct, bct, nbct;
  for (const auto& b : bins) {
    total += b;
    fct.push_back(ratio(b.fct_sum, b.flows));
    nfct.push_back(ratio(b.fct_sum, b.size_sum));
    bct.push_back(ratio(b.bct_sum, b.batches));
    nbct.push_back(ratio(b.bct_sum, b.bsize_sum));
  }
  ClassReport r;
  r.fct = batch_means(fct, ratio(total.fct_sum, total.flows));
  r.norm_fct = batch_means(nfct, ratio(total.fct_sum, total.size_sum));
  r.bct = batch_means(bct, ratio(total.bct_sum, total.batches));
  r.norm_bct = batch_means(nbct, ratio(total.bct_sum, total.bsize_sum));
  r.flows = static_cast<std::uint64_t>(total.flows);
  r.batches = static_cast<std::uint64_t>(total.batches);
  return r;
}

}  // namespace

double histogram_percentile(std::span<const double> weights, double percent) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return 0.0;
  double target = percent / 100.0 * total;
  double acc = 0.0;
  for (std::size_t n = 0; n < weights.size(); ++n) {
    acc += weights[n];
    if (acc >= target) return static_cast<double>(n);
  }
  return static_cast<double>(weights.size() - 1);
}

void finalize(SimReport& r) {
  r.classes.clear();
  std::vector<Bin> overall;
  for (const auto& cls : r.bins) {
    r.classes.push_back(summarize(cls));
    if (overall.size() < cls.size()) overall.resize(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) overall[i] += cls[i];
  }
  r.overall = summarize(overall);
  r.p999_active = histogram_percentile(r.occupancy_time, 99.9);
  double t = 0.0, mean = 0.0;
  for (std::size_t n = 0; n < r.occupancy_time.size(); ++n) {
    t += r.occupancy_time[n];
    mean += static_cast<double>(n) * r.occupancy_time[n];
  }
  r.mean_active = t > 0.0 ? mean / t : 0.0;
  r.utilization = r.observed_time > 0.0 ? r.busy_time / r.observed_time : 0.0;
}

SimReport merge(std::span<const SimReport> parts) {
  if (parts.empty()) throw std::invalid_argument("nothing to merge");
  SimReport out;
  out.discipline = parts.front().discipline;
  out.bins.resize(parts.front().bins.size());
  for (const auto& p : parts) {
    if (p.discipline != out.discipline || p.bins.size() != out.bins.size()) {
      throw std::invalid_argument("merging reports of different experiments");
    }
    out.seeds.insert(out.seeds.end(), p.seeds.begin(), p.seeds.end());
    for (std::size_t c = 0; c < p.bins.size(); ++c) {
      out.bins[c].insert(out.bins[c].end(), p.bins[c].begin(), p.bins[c].end());
    }
    if (out.occupancy_time.size() < p.occupancy_time.size()) {
      out.occupancy_time.resize(p.occupancy_time.size(), 0.0);
    }
    for (std::size_t n = 0; n < p.occupancy_time.size(); ++n) {
      out.occupancy_time[n] += p.occupancy_time[n];
    }
    out.arrivals += p.arrivals;
    out.completions += p.completions;
    out.in_flight += p.in_flight;
    out.work_arrived += p.work_arrived;
    out.work_served += p.work_served;
    out.work_in_system += p.work_in_system;
    out.busy_time += p.busy_time;
    out.observed_time += p.observed_time;
  }
  finalize(out);
  return out;
}

}  // namespace qsched::flowsim
