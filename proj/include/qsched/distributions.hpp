#pragma once

#include <cstdint>
#include <string>

#include "qsched/quadrature.hpp"
#include "qsched/rng.hpp"

namespace qsched {

// Flow sizes, think intervals and the like. Exponential and Weibull laws
// are parameterised by their cumulative hazard H(x) = (x / scale)^shape,
// with exponential being shape 1.
class Distribution {
 public:
  enum class Kind { deterministic, exponential, weibull };

  static Distribution deterministic(double value);
  static Distribution exponential(double mean);
  static Distribution weibull(double shape, double mean = 1.0);
  // Weibull whose squared coefficient of variation equals cv2.
  static Distribution weibull_from_cv2(double cv2, double mean = 1.0);

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  double shape() const { return shape_; }
  bool atomic() const { return kind_ == Kind::deterministic; }

  double mean() const { return raw_moment(1); }
  double cv2() const;
  double raw_moment(int order) const;

  double cdf(double x) const;
  double survival(double x) const;
  double pdf(double x) const;
  double quantile(double p) const;

  // H(x) and its inverse; only for nonatomic laws.
  double cumulative_hazard(double x) const;
  double size_at_hazard(double u) const;

  double sample(Rng& rng) const;

  // Same law with every value multiplied by factor.
  Distribution scaled(double factor) const;

  std::string describe() const;

 private:
  Distribution(Kind kind, double scale, double shape)
      : kind_(kind), scale_(scale), shape_(shape) {}

  Kind kind_;
  double scale_;
  double shape_;
};

// Point on the size axis handed to integrands: the size x, its cdf F(x) and
// survival 1 - F(x), both computed without cancellation.
struct LawPoint {
  double x;
  double cdf;
  double survival;
};

// Integral of phi(point) against the law's density over [x_lo, x_hi],
// computed after substituting u = H(x) so the density becomes e^{-u}.
template <class Phi>
Estimate integrate_against(const Distribution& d, Phi&& phi, double x_lo,
                           double x_hi, double rel_tol) {
  double u_lo = d.cumulative_hazard(x_lo);
  double u_hi = d.cumulative_hazard(x_hi);
  auto integrand = [&](double u) {
    double surv = std::exp(-u);
    LawPoint pt{d.size_at_hazard(u), -std::expm1(-u), surv};
    return phi(pt) * surv;
  };
  return integrate(integrand, u_lo, u_hi, rel_tol);
}

// m_i(x) = int_0^x t^i f(t) dt, via the regularized incomplete gamma function.
// Throws std::invalid_argument for atomic laws or a negative x.
double truncated_moment(const Distribution& d, int order, double x);

// Upper integration limit used by the analysis: quantile(1 - 1e-12).
double analysis_cutoff(const Distribution& d);

enum class BatchWeight {
  b_u_pow_b_minus_1,        // E[B u^{B-1}]
  bb1_u_pow_b_minus_2,      // E[B(B-1) u^{B-2}]
  b,                        // E[B]
  b_squared,                // E[B^2]
  b_b_minus_1               // E[B(B-1)]
};

// Number of flows in a batch, or of successive flows in a burst.
class BatchWidthLaw {
 public:
  enum class Kind {
    deterministic,
    geometric_from_1,
    geometric_from_0,
    two_point,
    hyper_geometric
  };

  static BatchWidthLaw deterministic(long width);
  static BatchWidthLaw geometric_from_1(double mean);
  static BatchWidthLaw geometric_from_0(double mean);
  // Width lo with probability 1 - p_hi, hi with probability p_hi.
  static BatchWidthLaw two_point(long lo, long hi, double p_hi);
  // Balanced-means mixture of two geometric-from-1 laws with the given
  // mean and squared coefficient of variation.
  static BatchWidthLaw hyper_geometric(double mean, double cv2);
  // Deterministic when cv2 == 0, hyper-geometric otherwise.
  static BatchWidthLaw from_moments(double mean, double cv2);

  Kind kind() const { return kind_; }

  double pmf(long b) const;
  long min_width() const;
  // Largest width with positive probability, or -1 when unbounded.
  long max_width() const;

  // Moments include B = 0 where the law allows it.
  double mean() const;
  double second_moment() const;
  double cv2() const;
  double prob_nonempty() const { return 1.0 - pmf(0); }
  // Mean of the widths actually emitted by sample() (zeros are resampled).
  double emitted_mean() const { return mean() / prob_nonempty(); }

  long sample(Rng& rng) const;

  std::string describe() const;

  // Geometric components (weight, success probability) for the geometric
  // kinds; the hyper-geometric law has two.
  struct Component {
    double weight;
    double p;
  };
  const Component* components() const { return comp_; }

 private:
  friend double batch_expectation(const BatchWidthLaw&, BatchWeight, double);

  BatchWidthLaw() = default;

  Kind kind_ = Kind::deterministic;
  long lo_ = 1;
  long hi_ = 1;
  double p_hi_ = 0.0;
  double mean_ = 1.0;  // geometric-from-0 parameter
  Component comp_[2] = {{1.0, 1.0}, {0.0, 1.0}};
};


// Closed form for the geometric kinds, exact finite sum otherwise.
double batch_expectation(const BatchWidthLaw& law, BatchWeight weight,
                         double u);

// Direct pmf summation, truncated once the geometric tail bound drops
// below 1e-12 of the partial sum. Throws std::runtime_error when the
// iteration cap is hit.
double batch_expectation_series(const BatchWidthLaw& law, BatchWeight weight,
                                double u);

}  // namespace qsched
