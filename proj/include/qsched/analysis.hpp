#pragma once

#include <span>
#include <vector>

#include "qsched/distributions.hpp"

namespace qsched::analysis {

// M^X/G/1 with Poisson batch arrivals at rate lambda on a unit-capacity link.
struct BatchModelParams {
  double lambda = 0.0;
  BatchWidthLaw width = BatchWidthLaw::deterministic(1);
  Distribution size = Distribution::exponential(1.0);

  // Batch rate giving load rho = lambda E[B] E[X].
  static BatchModelParams at_load(double rho, const BatchWidthLaw& width,
                                  const Distribution& size);

  double load() const { return lambda * width.mean() * size.mean(); }
  // Mean total size of a nonempty batch.
  double mean_batch_size() const;
};

// Terms of the conditional response time of a flow of size x.
struct ConditionalTerms {
  double rho_x = 0.0;     // load from flows smaller than x
  double w_t = 0.0;       // expected work from smaller flows found at arrival
  double s_f = 0.0;       // own-batch smaller work, tagged arbitrary flow
  double s_b = 0.0;       // own-batch smaller work, tagged largest flow
  double g = 0.0;         // density of the batch length at x
  double m2_batch = 0.0;  // second moment of the smaller-flow batch work
};

ConditionalTerms conditional_terms(const BatchModelParams& p, double x);

// T(x) = (w_t + own + x) / (1 - rho(x)).
inline double conditional_response(const ConditionalTerms& t, double own,
                                   double x) {
  return (t.w_t + own + x) / (1.0 - t.rho_x);
}

// Mean flow and batch completion times under per-flow PSJF. The outer
// integral runs to the size quantile 1 - 1e-12 (relative tolerance 1e-8)
// and an analytic bound on the remaining tail is added; `converged` is
// false if the quadrature missed its tolerance. For laws with empty
// batches the batch completion time is conditional on B >= 1.
// Throw std::invalid_argument when rho >= 1 or the size law is atomic.
Estimate psjf_mean_fct(const BatchModelParams& p);
Estimate psjf_mean_bct(const BatchModelParams& p);

// Integral of the batch-length density g over all sizes.
Estimate batch_length_mass(const BatchWidthLaw& width, const Distribution& size);

// Processor-sharing mean FCT normalised by the full-rate service time.
double ps_open_mean_fct(double rho);

// p-th percentile of a geometric occupancy with parameter rho.
double active_count_percentile(double rho, double percent);

// Closed network: clients alternate a PS link visit and an infinite-server
// think interval. Exact multi-class mean value analysis.
struct ClosedClass {
  int clients = 1;
  double mean_size = 1.0;
  double mean_think = 1.0;
};

struct ClosedPsResult {
  std::vector<double> throughput;  // flows per unit time, per class
  std::vector<double> response;    // mean FCT, per class
  double utilization = 0.0;
};

ClosedPsResult closed_ps_mva(std::span<const ClosedClass> classes);

// Factor c such that think means c * mean_size give the PS link the target
// utilization.
double closed_think_ratio_for_utilization(std::span<const ClosedClass> classes,
                                          double target);

}  // namespace qsched::analysis
