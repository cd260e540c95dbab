#include "qsched/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace qsched::analysis {

namespace {

// Moments of B that do not depend on x.
struct WidthMoments {
  double eb;
  double eb2;
  double ebb1;
};

WidthMoments width_moments(const BatchWidthLaw& w) {
  return {batch_expectation(w, BatchWeight::b, 1.0),
          batch_expectation(w, BatchWeight::b_squared, 1.0),
          batch_expectation(w, BatchWeight::b_b_minus_1, 1.0)};
}

void check_model(const BatchModelParams& p) {
  if (p.size.atomic()) {
    throw std::invalid_argument("analysis needs a nonatomic size law");
  }
  double rho = p.load();
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("analysis needs load in [0, 1)");
  }
}

// E[B(B-1)F^{B-2}] / E[B F^{B-1}] when the denominator underflows: the ratio
// is then dominated by the smallest width w, giving (w - 1) / F.
double own_batch_ratio(const BatchWidthLaw& w, double cdf, double num,
                       double den) {
  if (den > 0.0) return num / den;
  if (cdf <= 0.0) return 0.0;
  long b = std::max(1L, w.min_width());
  return static_cast<double>(b - 1) / cdf;
}

struct Evaluator {
  const BatchModelParams& p;
  WidthMoments wm;

  ConditionalTerms at(const LawPoint& pt) const {
    ConditionalTerms t;
    double m1 = truncated_moment(p.size, 1, pt.x);
    double m2 = truncated_moment(p.size, 2, pt.x);
    t.rho_x = p.lambda * wm.eb * m1;
    t.m2_batch = wm.ebb1 * m1 * m1 + wm.eb * m2;
    t.w_t = p.lambda * t.m2_batch / (2.0 * (1.0 - t.rho_x));
    t.s_f = (wm.eb2 / wm.eb - 1.0) * m1;
    double den = batch_expectation(p.width, BatchWeight::b_u_pow_b_minus_1, pt.cdf);
    double num = batch_expectation(p.width, BatchWeight::bb1_u_pow_b_minus_2, pt.cdf);
    t.s_b = own_batch_ratio(p.width, pt.cdf, num, den) * m1;
    t.g = den * p.size.pdf(pt.x);
    return t;
  }

  // Conservative estimate of the integrand mass beyond x_hi.
  double tail(double x_hi, double own_at_inf, double mass_factor) const {
    double rho = p.load();
    double m1 = p.size.raw_moment(1);
    double m2 = p.size.raw_moment(2);
    double w_inf = p.lambda * (wm.ebb1 * m1 * m1 + wm.eb * m2) / (2.0 * (1.0 - rho));
    double tail_x = std::max(0.0, m1 - truncated_moment(p.size, 1, x_hi));
    double surv = p.size.survival(x_hi);
    return mass_factor * ((w_inf + own_at_inf) * surv + tail_x) / (1.0 - rho);
  }
};

}  // namespace

BatchModelParams BatchModelParams::at_load(double rho, const BatchWidthLaw& width,
                                           const Distribution& size) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("load must be in [0, 1)");
  BatchModelParams p;
  p.width = width;
  p.size = size;
  p.lambda = rho / (width.mean() * size.mean());
  return p;
}

double BatchModelParams::mean_batch_size() const {
  return width.mean() * size.mean() / width.prob_nonempty();
}

ConditionalTerms conditional_terms(const BatchModelParams& p, double x) {
  check_model(p);
  if (!(x >= 0.0)) throw std::invalid_argument("x must be >= 0");
  Evaluator ev{p, width_moments(p.width)};
  return ev.at({x, p.size.cdf(x), p.size.survival(x)});
}

Estimate psjf_mean_fct(const BatchModelParams& p) {
  check_model(p);
  Evaluator ev{p, width_moments(p.width)};
  double x_hi = analysis_cutoff(p.size);
  auto body = integrate_against(
      p.size,
      [&](const LawPoint& pt) {
        auto t = ev.at(pt);
        return conditional_response(t, t.s_f, pt.x);
      },
      0.0, x_hi, 1e-8);
  double s_f_inf = (ev.wm.eb2 / ev.wm.eb - 1.0) * p.size.mean();
  double tail = ev.tail(x_hi, s_f_inf, 1.0);
  return {body.value + tail, body.error + tail, body.converged};
}

Estimate psjf_mean_bct(const BatchModelParams& p) {
  check_model(p);
  Evaluator ev{p, width_moments(p.width)};
  double x_hi = analysis_cutoff(p.size);
  auto body = integrate_against(
      p.size,
      [&](const LawPoint& pt) {
        auto t = ev.at(pt);
        double den = batch_expectation(p.width, BatchWeight::b_u_pow_b_minus_1, pt.cdf);
        return conditional_response(t, t.s_b, pt.x) * den;
      },
      0.0, x_hi, 1e-8);
  double nonempty = p.width.prob_nonempty();
  double s_b_inf = ev.wm.ebb1 / ev.wm.eb * p.size.mean();
  double tail = ev.tail(x_hi, s_b_inf, ev.wm.eb) / nonempty;
  return {body.value / nonempty + tail, body.error / nonempty + tail,
          body.converged};
}

Estimate batch_length_mass(const BatchWidthLaw& width, const Distribution& size) {
  if (size.atomic()) throw std::invalid_argument("batch length density needs a nonatomic law");
  auto r = integrate_against(
      size,
      [&](const LawPoint& pt) {
        return batch_expectation(width, BatchWeight::b_u_pow_b_minus_1, pt.cdf);
      },
      0.0, std::numeric_limits<double>::infinity(), 1e-12);
  return r;
}

double ps_open_mean_fct(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("PS load must be in [0, 1)");
  return 1.0 / (1.0 - rho);
}

double active_count_percentile(double rho, double percent) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("load must be in (0, 1)");
  if (!(percent >= 0.0 && percent < 100.0)) {
    throw std::invalid_argument("percentile must be in [0, 100)");
  }
  return std::log1p(-percent / 100.0) / std::log(rho);
}

ClosedPsResult closed_ps_mva(std::span<const ClosedClass> classes) {
  const std::size_t k = classes.size();
  if (k == 0) throw std::invalid_argument("closed network needs at least one class");
  std::vector<std::size_t> radix(k), stride(k);
  std::size_t states = 1;
  for (std::size_t c = 0; c < k; ++c) {
    if (classes[c].clients < 1) throw std::invalid_argument("class needs >= 1 client");
    radix[c] = static_cast<std::size_t>(classes[c].clients) + 1;
    stride[c] = states;
    states *= radix[c];
  }
  // Mean link occupancy for every population vector, filled in index order
  // so that n - e_c is always ready before n.
  std::vector<double> queue(states, 0.0);
  std::vector<double> x(k), r(k);
  std::vector<std::size_t> n(k, 0);
  for (std::size_t idx = 1; idx < states; ++idx) {
    for (std::size_t c = 0; c < k; ++c) n[c] = (idx / stride[c]) % radix[c];
    double q = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (n[c] == 0) continue;
      double rc = classes[c].mean_size * (1.0 + queue[idx - stride[c]]);
      double xc = static_cast<double>(n[c]) / (classes[c].mean_think + rc);
      q += xc * rc;
    }
    queue[idx] = q;
  }
  ClosedPsResult out;
  out.throughput.resize(k);
  out.response.resize(k);
  std::size_t full = states - 1;
  for (std::size_t c = 0; c < k; ++c) {
    double rc = classes[c].mean_size * (1.0 + queue[full - stride[c]]);
    out.response[c] = rc;
    out.throughput[c] = classes[c].clients / (classes[c].mean_think + rc);
    out.utilization += out.throughput[c] * classes[c].mean_size;
  }
  return out;
}

double closed_think_ratio_for_utilization(std::span<const ClosedClass> classes,
                                          double target) {
  if (!(target > 0.0 && target < 1.0)) {
    throw std::invalid_argument("target utilization must be in (0, 1)");
  }
  std::vector<ClosedClass> work(classes.begin(), classes.end());
  auto util_at = [&](double log_ratio) {
    double ratio = std::exp(log_ratio);
    for (std::size_t c = 0; c < work.size(); ++c) {
      work[c].mean_think = ratio * classes[c].mean_size;
    }
    return closed_ps_mva(work).utilization - target;
  };
  double lo = std::log(1e-6), hi = std::log(1e9);
  if (util_at(lo) < 0.0) throw std::invalid_argument("target utilization unreachable");
  boost::uintmax_t iters = 200;
  auto root = boost::math::tools::toms748_solve(
      util_at, lo, hi, boost::math::tools::eps_tolerance<double>(48), iters);
  return std::exp(0.5 * (root.first + root.second));
}

}  // namespace qsched::analysis
